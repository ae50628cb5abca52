#include <cstdlib>
#include <cstring>

#include "pamri/simd/kernels.hpp"

namespace pamri::simd {
namespace {

const KernelTable& select() {
  if (const char* env = std::getenv("PAMRI_NO_SIMD")) {
    if (std::strcmp(env, "0") != 0) return scalar_kernels();
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (cpu_has_avx2()) return avx2_kernels();
#endif
  return scalar_kernels();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace pamri::simd
