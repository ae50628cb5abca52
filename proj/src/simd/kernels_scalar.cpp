// Reference kernels. Built with -ffp-contract=off so the expression trees
// round exactly like the hand-written AVX2 versions (which use no FMA).

#include "pamri/simd/kernels.hpp"

namespace pamri::simd {
namespace {

void cmul_scalar(cdouble* dst, const cdouble* a, const cdouble* b,
                 std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    dst[i] = {ar * br - ai * bi, ai * br + ar * bi};
  }
}

void conj_mul_add_scalar(cdouble* acc, const cdouble* s, const cdouble* v,
                         std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double sr = s[i].real(), si = s[i].imag();
    const double vr = v[i].real(), vi = v[i].imag();
    acc[i] = {acc[i].real() + (sr * vr + si * vi),
              acc[i].imag() + (sr * vi - si * vr)};
  }
}

void rmul_scalar(cdouble* dst, const double* w, const cdouble* v,
                 std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    dst[i] = {w[i] * v[i].real(), w[i] * v[i].imag()};
  }
}

void axpy_scalar(cdouble* y, double a, const cdouble* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = {y[i].real() + a * x[i].real(), y[i].imag() + a * x[i].imag()};
  }
}

void xpby_scalar(cdouble* p, const cdouble* r, double b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = {r[i].real() + b * p[i].real(), r[i].imag() + b * p[i].imag()};
  }
}

void abs2_add_scalar(double* acc, const cdouble* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = v[i].real(), im = v[i].imag();
    acc[i] = acc[i] + (re * re + im * im);
  }
}

cdouble dotc_scalar(const cdouble* a, const cdouble* b, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

double norm_sq_scalar(const cdouble* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    s += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
  }
  return s;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table = {
      "scalar",         cmul_scalar, conj_mul_add_scalar, rmul_scalar,
      axpy_scalar,      xpby_scalar, abs2_add_scalar,     dotc_scalar,
      norm_sq_scalar,
  };
  return table;
}

}  // namespace pamri::simd
