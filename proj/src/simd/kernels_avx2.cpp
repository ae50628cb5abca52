// AVX2 kernels on interleaved complex<double> (two complex values per
// 256-bit register). No FMA: elementwise results must match the scalar
// reference bit for bit, so every expression uses the same mul/add/sub tree.

#include "pamri/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace pamri::simd {
namespace {

const std::size_t kStep = 2;  // complex doubles per __m256d

// [ar*br - ai*bi, ai*br + ar*bi]
inline __m256d cmul_pd(__m256d va, __m256d vb) {
  const __m256d b_re = _mm256_movedup_pd(vb);       // [br, br]
  const __m256d b_im = _mm256_permute_pd(vb, 0xF);  // [bi, bi]
  const __m256d a_sw = _mm256_permute_pd(va, 0x5);  // [ai, ar]
  const __m256d t0 = _mm256_mul_pd(va, b_re);       // [ar*br, ai*br]
  const __m256d t1 = _mm256_mul_pd(a_sw, b_im);     // [ai*bi, ar*bi]
  return _mm256_addsub_pd(t0, t1);
}

// [sr*vr + si*vi, sr*vi - si*vr]
inline __m256d conj_mul_pd(__m256d vs, __m256d vv) {
  const __m256d s_re = _mm256_movedup_pd(vs);
  const __m256d s_im = _mm256_permute_pd(vs, 0xF);
  const __m256d v_sw = _mm256_permute_pd(vv, 0x5);  // [vi, vr]
  const __m256d t0 = _mm256_mul_pd(vv, s_re);       // [sr*vr, sr*vi]
  const __m256d t1 = _mm256_mul_pd(v_sw, s_im);     // [si*vi, si*vr]
  const __m256d t1n = _mm256_xor_pd(t1, _mm256_set1_pd(-0.0));
  return _mm256_addsub_pd(t0, t1n);  // even: t0+t1, odd: t0-t1
}

void cmul_avx2(cdouble* dst, const cdouble* a, const cdouble* b,
               std::size_t n) {
  std::size_t i = 0;
  for (; i + kStep <= n; i += kStep) {
    const __m256d va = _mm256_loadu_pd(reinterpret_cast<const double*>(a + i));
    const __m256d vb = _mm256_loadu_pd(reinterpret_cast<const double*>(b + i));
    _mm256_storeu_pd(reinterpret_cast<double*>(dst + i), cmul_pd(va, vb));
  }
  for (; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    dst[i] = {ar * br - ai * bi, ai * br + ar * bi};
  }
}

void conj_mul_add_avx2(cdouble* acc, const cdouble* s, const cdouble* v,
                       std::size_t n) {
  std::size_t i = 0;
  for (; i + kStep <= n; i += kStep) {
    const __m256d vs = _mm256_loadu_pd(reinterpret_cast<const double*>(s + i));
    const __m256d vv = _mm256_loadu_pd(reinterpret_cast<const double*>(v + i));
    const __m256d va =
        _mm256_loadu_pd(reinterpret_cast<const double*>(acc + i));
    _mm256_storeu_pd(reinterpret_cast<double*>(acc + i),
                     _mm256_add_pd(va, conj_mul_pd(vs, vv)));
  }
  for (; i < n; ++i) {
    const double sr = s[i].real(), si = s[i].imag();
    const double vr = v[i].real(), vi = v[i].imag();
    acc[i] = {acc[i].real() + (sr * vr + si * vi),
              acc[i].imag() + (sr * vi - si * vr)};
  }
}

void rmul_avx2(cdouble* dst, const double* w, const cdouble* v,
               std::size_t n) {
  std::size_t i = 0;
  for (; i + kStep <= n; i += kStep) {
    const __m128d w0 = _mm_loaddup_pd(w + i);
    const __m128d w1 = _mm_loaddup_pd(w + i + 1);
    const __m256d ww = _mm256_set_m128d(w1, w0);
    const __m256d vv = _mm256_loadu_pd(reinterpret_cast<const double*>(v + i));
    _mm256_storeu_pd(reinterpret_cast<double*>(dst + i),
                     _mm256_mul_pd(ww, vv));
  }
  for (; i < n; ++i) {
    dst[i] = {w[i] * v[i].real(), w[i] * v[i].imag()};
  }
}

void axpy_avx2(cdouble* y, double a, const cdouble* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + kStep <= n; i += kStep) {
    const __m256d vx = _mm256_loadu_pd(reinterpret_cast<const double*>(x + i));
    const __m256d vy = _mm256_loadu_pd(reinterpret_cast<const double*>(y + i));
    _mm256_storeu_pd(reinterpret_cast<double*>(y + i),
                     _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
  }
  for (; i < n; ++i) {
    y[i] = {y[i].real() + a * x[i].real(), y[i].imag() + a * x[i].imag()};
  }
}

void xpby_avx2(cdouble* p, const cdouble* r, double b, std::size_t n) {
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + kStep <= n; i += kStep) {
    const __m256d vp = _mm256_loadu_pd(reinterpret_cast<const double*>(p + i));
    const __m256d vr = _mm256_loadu_pd(reinterpret_cast<const double*>(r + i));
    _mm256_storeu_pd(reinterpret_cast<double*>(p + i),
                     _mm256_add_pd(vr, _mm256_mul_pd(vb, vp)));
  }
  for (; i < n; ++i) {
    p[i] = {r[i].real() + b * p[i].real(), r[i].imag() + b * p[i].imag()};
  }
}

void abs2_add_avx2(double* acc, const cdouble* v, std::size_t n) {
  std::size_t i = 0;
  for (; i + kStep <= n; i += kStep) {
    const __m256d vv = _mm256_loadu_pd(reinterpret_cast<const double*>(v + i));
    const __m256d sq = _mm256_mul_pd(vv, vv);
    const __m256d h = _mm256_hadd_pd(sq, sq);  // [s0, s0, s1, s1]
    const __m128d lo = _mm256_castpd256_pd128(h);
    const __m128d hi = _mm256_extractf128_pd(h, 1);
    const __m128d s = _mm_shuffle_pd(lo, hi, 0x0);  // [s0, s1]
    _mm_storeu_pd(acc + i, _mm_add_pd(_mm_loadu_pd(acc + i), s));
  }
  for (; i < n; ++i) {
    const double re = v[i].real(), im = v[i].imag();
    acc[i] = acc[i] + (re * re + im * im);
  }
}

cdouble dotc_avx2(const cdouble* a, const cdouble* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();  // [re0, im0, re1, im1] partials
  std::size_t i = 0;
  for (; i + kStep <= n; i += kStep) {
    const __m256d va = _mm256_loadu_pd(reinterpret_cast<const double*>(a + i));
    const __m256d vb = _mm256_loadu_pd(reinterpret_cast<const double*>(b + i));
    acc = _mm256_add_pd(acc, conj_mul_pd(va, vb));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double re = lanes[0] + lanes[2];
  double im = lanes[1] + lanes[3];
  for (; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

double norm_sq_avx2(const cdouble* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + kStep <= n; i += kStep) {
    const __m256d va = _mm256_loadu_pd(reinterpret_cast<const double*>(a + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(va, va));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) {
    s += a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
  }
  return s;
}

}  // namespace

const KernelTable& avx2_kernels() {
  static const KernelTable table = {
      "avx2",    cmul_avx2, conj_mul_add_avx2, rmul_avx2, axpy_avx2,
      xpby_avx2, abs2_add_avx2, dotc_avx2,     norm_sq_avx2,
  };
  return table;
}

bool cpu_has_avx2() { return __builtin_cpu_supports("avx2") != 0; }

}  // namespace pamri::simd

#endif  // x86_64
