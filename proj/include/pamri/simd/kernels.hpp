#pragma once

#include <complex>
#include <cstddef>
#include <cstdlib>
#include <new>
#include <vector>

namespace pamri::simd {

using cdouble = std::complex<double>;

/// Hot elementwise / reduction loops shared by the encoding operator, the CG
/// solver, the coil combine and the metrics. Scalar reference versions live
/// in kernels_scalar.cpp, AVX2 versions in kernels_avx2.cpp; active() binds
/// the best table once at startup (PAMRI_NO_SIMD=1 forces the reference).
///
/// Elementwise kernels (cmul, conj_mul_add, rmul, axpy, xpby, abs2_add) are
/// bit-identical between tables: both sides evaluate the same expression tree
/// and the scalar translation units are built with fp-contract off.
/// Reductions (dotc, norm_sq) reassociate lanes and agree only to rounding.
struct KernelTable {
  const char* name;

  /// dst[i] = a[i] * b[i]
  void (*cmul)(cdouble* dst, const cdouble* a, const cdouble* b,
               std::size_t n);
  /// acc[i] += conj(s[i]) * v[i]
  void (*conj_mul_add)(cdouble* acc, const cdouble* s, const cdouble* v,
                       std::size_t n);
  /// dst[i] = w[i] * v[i], real weight field times complex field
  void (*rmul)(cdouble* dst, const double* w, const cdouble* v, std::size_t n);
  /// y[i] += a * x[i], real scalar
  void (*axpy)(cdouble* y, double a, const cdouble* x, std::size_t n);
  /// p[i] = r[i] + b * p[i], real scalar
  void (*xpby)(cdouble* p, const cdouble* r, double b, std::size_t n);
  /// acc[i] += |v[i]|^2
  void (*abs2_add)(double* acc, const cdouble* v, std::size_t n);
  /// sum_i conj(a[i]) * b[i]
  cdouble (*dotc)(const cdouble* a, const cdouble* b, std::size_t n);
  /// sum_i |a[i]|^2
  double (*norm_sq)(const cdouble* a, std::size_t n);
};

const KernelTable& scalar_kernels();

#if defined(__x86_64__) || defined(_M_X64)
const KernelTable& avx2_kernels();
bool cpu_has_avx2();
#endif

/// The runtime-selected table. Selection happens once and is then cached.
const KernelTable& active();

/// 32-byte aligned allocator so kernel loads hit aligned cache lines.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::size_t alignment = 32;

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(std::size_t n) {
    const std::size_t bytes = (n * sizeof(T) + alignment - 1) & ~(alignment - 1);
    void* p = std::aligned_alloc(alignment, bytes);
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { std::free(p); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const {
    return true;
  }
};

template <class T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

}  // namespace pamri::simd
