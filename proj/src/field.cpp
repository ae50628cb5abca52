#include "pamri/field.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace pamri {

void throw_if_shape_mismatch(const ComplexImage& a, const ComplexImage& b,
                             const char* where) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(where) + ": shape mismatch " +
                     std::to_string(a.height()) + "x" +
                     std::to_string(a.width()) + " vs " +
                     std::to_string(b.height()) + "x" +
                     std::to_string(b.width()));
  }
}

namespace {

// FFTW planning is not thread-safe; execution with fftw_execute_dft on
// distinct arrays is. Plans are created with FFTW_UNALIGNED so they may be
// executed on any caller buffer.
class PlanCache {
 public:
  fftw_plan get(int h, int w, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto key = std::make_tuple(h, w, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;

    std::vector<fftw_complex> scratch(static_cast<std::size_t>(h) * w);
    fftw_plan plan =
        fftw_plan_dft_2d(h, w, scratch.data(), scratch.data(), sign,
                         FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

// Centered transform = fftshift o rawDFT o ifftshift, with 1/sqrt(N) applied
// on output. The shifts are fused into the copy loops: ifftshift gathers with
// offset floor(n/2), fftshift gathers with offset ceil(n/2).
ComplexImage centered_transform(const ComplexImage& in, int sign) {
  const int h = in.height(), w = in.width();
  const std::size_t n = in.size();

  simd::AlignedVector<cdouble> buf(n);
  const int rin = h / 2, cin = w / 2;  // ifftshift offsets
  for (int r = 0; r < h; ++r) {
    const int rs = r + rin < h ? r + rin : r + rin - h;
    for (int c = 0; c < w; ++c) {
      const int cs = c + cin < w ? c + cin : c + cin - w;
      buf[static_cast<std::size_t>(r) * w + c] = in.at(rs, cs);
    }
  }

  fftw_plan plan = plan_cache().get(h, w, sign);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(buf.data()),
                   reinterpret_cast<fftw_complex*>(buf.data()));

  ComplexImage out(h, w);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const int rout = (h + 1) / 2, cout = (w + 1) / 2;  // fftshift offsets
  for (int r = 0; r < h; ++r) {
    const int rs = r + rout < h ? r + rout : r + rout - h;
    for (int c = 0; c < w; ++c) {
      const int cs = c + cout < w ? c + cout : c + cout - w;
      out.at(r, c) = buf[static_cast<std::size_t>(rs) * w + cs] * scale;
    }
  }
  return out;
}

}  // namespace

KSpacePlane fft2c(const ComplexImage& img) {
  return centered_transform(img, FFTW_FORWARD);
}

ComplexImage ifft2c(const KSpacePlane& k) {
  return centered_transform(k, FFTW_BACKWARD);
}

}  // namespace pamri
