#include "pamri/operators.hpp"

#include <cmath>

namespace pamri {

namespace {

const simd::KernelTable& K() { return simd::active(); }

}  // namespace

EncodingOperator::EncodingOperator(SamplingMask mask, CoilSensitivities coils)
    : mask_(std::move(mask)), coils_(std::move(coils)) {
  mask_.validate();
  if (coils_.n_coils() < 1) {
    throw ConfigError("EncodingOperator: at least one coil required");
  }
  if (coils_.height() != mask_.height || coils_.width() != mask_.width) {
    throw ShapeError("EncodingOperator: coil map shape " +
                     std::to_string(coils_.height()) + "x" +
                     std::to_string(coils_.width()) + " != mask shape " +
                     std::to_string(mask_.height) + "x" +
                     std::to_string(mask_.width));
  }
  weights_ = mask_.effective_weights();
}

MultiCoilKSpace EncodingOperator::forward(const ComplexImage& x) const {
  if (x.height() != mask_.height || x.width() != mask_.width) {
    throw ShapeError("forward: image shape mismatch");
  }
  MultiCoilKSpace y;
  y.planes.reserve(coils_.n_coils());
  ComplexImage weighted(x.height(), x.width());
  for (int c = 0; c < coils_.n_coils(); ++c) {
    K().cmul(weighted.data(), coils_.maps[c].data(), x.data(), x.size());
    KSpacePlane k = fft2c(weighted);
    K().rmul(k.data(), weights_.data(), k.data(), k.size());
    y.planes.push_back(std::move(k));
  }
  return y;
}

ComplexImage EncodingOperator::adjoint(const MultiCoilKSpace& y) const {
  if (y.n_coils() != coils_.n_coils()) {
    throw ShapeError("adjoint: coil count mismatch");
  }
  if (y.height() != mask_.height || y.width() != mask_.width) {
    throw ShapeError("adjoint: k-space shape mismatch");
  }
  ComplexImage acc(mask_.height, mask_.width);
  KSpacePlane masked(mask_.height, mask_.width);
  // Coils are accumulated in ascending order so results do not depend on
  // any internal parallelism.
  for (int c = 0; c < coils_.n_coils(); ++c) {
    K().rmul(masked.data(), weights_.data(), y.planes[c].data(), masked.size());
    const ComplexImage img = ifft2c(masked);
    K().conj_mul_add(acc.data(), coils_.maps[c].data(), img.data(), acc.size());
  }
  return acc;
}

ComplexImage EncodingOperator::normal(const ComplexImage& x) const {
  if (x.height() != mask_.height || x.width() != mask_.width) {
    throw ShapeError("normal: image shape mismatch");
  }
  ComplexImage acc(mask_.height, mask_.width);
  ComplexImage weighted(x.height(), x.width());
  for (int c = 0; c < coils_.n_coils(); ++c) {
    K().cmul(weighted.data(), coils_.maps[c].data(), x.data(), x.size());
    KSpacePlane k = fft2c(weighted);
    // forward then adjoint masking: weights applied twice (w^2 for relaxed).
    K().rmul(k.data(), weights_.data(), k.data(), k.size());
    K().rmul(k.data(), weights_.data(), k.data(), k.size());
    const ComplexImage img = ifft2c(k);
    K().conj_mul_add(acc.data(), coils_.maps[c].data(), img.data(), acc.size());
  }
  return acc;
}

cdouble inner_product(const ComplexImage& a, const ComplexImage& b) {
  throw_if_shape_mismatch(a, b, "inner_product");
  return K().dotc(a.data(), b.data(), a.size());
}

double norm2(const ComplexImage& a) {
  return std::sqrt(K().norm_sq(a.data(), a.size()));
}

CGResult cg_solve(const std::function<ComplexImage(const ComplexImage&)>& apply_normal,
                  const ComplexImage& rhs, const CGParams& params) {
  if (params.tol <= 0.0 || params.max_iter < 1) {
    throw ConfigError("cg_solve: tol must be > 0 and max_iter >= 1");
  }

  CGResult result;
  result.x = ComplexImage(rhs.height(), rhs.width());

  const double rhs_norm_sq = K().norm_sq(rhs.data(), rhs.size());
  if (rhs_norm_sq == 0.0) {
    result.converged = true;
    return result;
  }

  ComplexImage r = rhs;  // residual of the zero initial guess
  ComplexImage p = rhs;
  double r_sq = rhs_norm_sq;

  for (int it = 0; it < params.max_iter; ++it) {
    const ComplexImage q = apply_normal(p);
    const double p_dot_q = K().dotc(p.data(), q.data(), p.size()).real();
    if (!std::isfinite(p_dot_q) || p_dot_q <= 0.0) {
      throw NumericalError(
          "cg_solve: operator is not positive definite on the current "
          "subspace (p.Ap = " + std::to_string(p_dot_q) + ")");
    }
    const double alpha = r_sq / p_dot_q;
    K().axpy(result.x.data(), alpha, p.data(), result.x.size());
    K().axpy(r.data(), -alpha, q.data(), r.size());

    const double r_sq_new = K().norm_sq(r.data(), r.size());
    if (!std::isfinite(r_sq_new)) {
      throw NumericalError("cg_solve: residual became non-finite");
    }
    result.iterations = it + 1;
    result.relative_residual = std::sqrt(r_sq_new / rhs_norm_sq);
    if (result.relative_residual <= params.tol) {
      result.converged = true;
      return result;
    }
    const double beta = r_sq_new / r_sq;
    K().xpby(p.data(), r.data(), beta, p.size());
    r_sq = r_sq_new;
  }
  return result;
}

}  // namespace pamri
