#pragma once

#include <complex>
#include <cstddef>

#include "pamri/errors.hpp"
#include "pamri/simd/kernels.hpp"

namespace pamri {

using cdouble = std::complex<double>;

/// Dense 2D complex field, row-major. Used for both image-domain and
/// k-space-domain data; KSpacePlane below is an alias that documents intent.
class ComplexImage {
 public:
  ComplexImage() = default;  // empty sentinel; not valid for operations

  ComplexImage(int height, int width) : h_(height), w_(width) {
    if (height < 2 || width < 2) {
      throw ShapeError("ComplexImage: dimensions must be >= 2, got " +
                       std::to_string(height) + "x" + std::to_string(width));
    }
    data_.assign(static_cast<std::size_t>(height) * width, cdouble{0.0, 0.0});
  }

  int height() const { return h_; }
  int width() const { return w_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  cdouble& at(int r, int c) { return data_[static_cast<std::size_t>(r) * w_ + c]; }
  const cdouble& at(int r, int c) const {
    return data_[static_cast<std::size_t>(r) * w_ + c];
  }

  cdouble* data() { return data_.data(); }
  const cdouble* data() const { return data_.data(); }

  bool same_shape(const ComplexImage& other) const {
    return h_ == other.h_ && w_ == other.w_;
  }

  bool operator==(const ComplexImage& other) const {
    return h_ == other.h_ && w_ == other.w_ && data_ == other.data_;
  }

 private:
  int h_ = 0;
  int w_ = 0;
  simd::AlignedVector<cdouble> data_;
};

/// Single-coil frequency-domain plane; same shape rules as ComplexImage.
using KSpacePlane = ComplexImage;

/// Centered orthonormal 2D DFT: DC lands at (h/2, w/2), and
/// ||fft2c(x)|| == ||x||. ifft2c is the exact inverse (= adjoint).
KSpacePlane fft2c(const ComplexImage& img);
ComplexImage ifft2c(const KSpacePlane& k);

void throw_if_shape_mismatch(const ComplexImage& a, const ComplexImage& b,
                             const char* where);

}  // namespace pamri
