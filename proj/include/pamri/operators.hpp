#pragma once

#include <functional>
#include <vector>

#include "pamri/field.hpp"
#include "pamri/phantom.hpp"
#include "pamri/sampling.hpp"

namespace pamri {

/// Stack of per-coil k-space planes.
struct MultiCoilKSpace {
  std::vector<KSpacePlane> planes;

  int n_coils() const { return static_cast<int>(planes.size()); }
  int height() const { return planes.empty() ? 0 : planes.front().height(); }
  int width() const { return planes.empty() ? 0 : planes.front().width(); }
};

struct CGParams {
  double tol = 1e-6;  // relative residual threshold
  int max_iter = 30;
};

/// Multi-coil encoding operator: image -> masked per-coil k-space,
/// forward(x)_c = M o F(S_c o x). The mask weight is 1 on ACS and the binary
/// or relaxed high-part value elsewhere; the adjoint applies the same real
/// weights, so adjoint() is the exact conjugate transpose of forward().
class EncodingOperator {
 public:
  EncodingOperator(SamplingMask mask, CoilSensitivities coils);

  MultiCoilKSpace forward(const ComplexImage& x) const;
  ComplexImage adjoint(const MultiCoilKSpace& y) const;

  /// adjoint(forward(x)) without materializing the k-space stack.
  ComplexImage normal(const ComplexImage& x) const;

  int height() const { return mask_.height; }
  int width() const { return mask_.width; }
  int n_coils() const { return coils_.n_coils(); }
  const SamplingMask& mask() const { return mask_; }
  const CoilSensitivities& coils() const { return coils_; }

 private:
  SamplingMask mask_;
  CoilSensitivities coils_;
  std::vector<double> weights_;  // cached effective mask weights
};

struct CGResult {
  ComplexImage x;
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/// Conjugate gradients for Hermitian positive definite `apply_normal`,
/// starting from zero. Returns once the relative residual drops below
/// params.tol or max_iter is reached. Throws NumericalError on NaN/Inf.
CGResult cg_solve(const std::function<ComplexImage(const ComplexImage&)>& apply_normal,
                  const ComplexImage& rhs, const CGParams& params);

/// sum_i conj(a_i) * b_i over all pixels.
cdouble inner_product(const ComplexImage& a, const ComplexImage& b);

/// sqrt(sum_i |a_i|^2).
double norm2(const ComplexImage& a);

}  // namespace pamri
