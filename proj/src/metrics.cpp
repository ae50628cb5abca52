#include "pamri/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace pamri {

namespace {

std::vector<double> magnitude(const ComplexImage& x) {
  std::vector<double> m(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) m[i] = std::abs(x.data()[i]);
  return m;
}

double max_abs(const ComplexImage& x) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    m = std::max(m, std::abs(x.data()[i]));
  }
  return m;
}

ComplexImage crop(const ComplexImage& x, const LesionBox& b) {
  ComplexImage out(b.rows(), b.cols());
  for (int r = 0; r < b.rows(); ++r) {
    for (int c = 0; c < b.cols(); ++c) {
      out.at(r, c) = x.at(b.row_min + r, b.col_min + c);
    }
  }
  return out;
}

double psnr_with_range(const ComplexImage& x, const ComplexImage& ref,
                       double range) {
  throw_if_shape_mismatch(x, ref, "psnr");
  double mse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = std::abs(x.data()[i]) - std::abs(ref.data()[i]);
    mse += d * d;
  }
  mse /= static_cast<double>(x.size());
  if (mse == 0.0) return kPsnrSentinelDb;
  return std::min(kPsnrSentinelDb, 10.0 * std::log10(range * range / mse));
}

}  // namespace

double psnr(const ComplexImage& x, const ComplexImage& ref) {
  const double range = max_abs(ref);
  if (range == 0.0) throw ConfigError("psnr: reference image is identically zero");
  return psnr_with_range(x, ref, range);
}

double ssim(const ComplexImage& x, const ComplexImage& ref, int window,
            std::optional<double> dynamic_range) {
  throw_if_shape_mismatch(x, ref, "ssim");
  const int h = x.height(), w = x.width();
  if (window < 3) throw ConfigError("ssim: window must be >= 3");
  if (h < window || w < window) {
    throw ShapeError("ssim: image " + std::to_string(h) + "x" +
                     std::to_string(w) + " smaller than the " +
                     std::to_string(window) +
                     " window; use the box-clipped lesion variant");
  }

  const double L = dynamic_range.value_or(max_abs(ref));
  if (L == 0.0) throw ConfigError("ssim: reference dynamic range is zero");
  const double c1 = (0.01 * L) * (0.01 * L);
  const double c2 = (0.03 * L) * (0.03 * L);

  // Gaussian window, sigma 1.5, normalized.
  const int radius = window / 2;
  std::vector<double> g(window);
  double gsum = 0.0;
  for (int i = 0; i < window; ++i) {
    const double d = i - radius;
    g[i] = std::exp(-0.5 * d * d / (1.5 * 1.5));
    gsum += g[i];
  }
  for (double& v : g) v /= gsum;

  const std::vector<double> a = magnitude(x);
  const std::vector<double> b = magnitude(ref);

  // Separable weighted moments, valid region only.
  const int oh = h - window + 1, ow = w - window + 1;
  auto filter = [&](const std::vector<double>& src) {
    std::vector<double> tmp(static_cast<std::size_t>(h) * ow);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < ow; ++c) {
        double acc = 0.0;
        for (int t = 0; t < window; ++t) {
          acc += g[t] * src[static_cast<std::size_t>(r) * w + c + t];
        }
        tmp[static_cast<std::size_t>(r) * ow + c] = acc;
      }
    }
    std::vector<double> out(static_cast<std::size_t>(oh) * ow);
    for (int r = 0; r < oh; ++r) {
      for (int c = 0; c < ow; ++c) {
        double acc = 0.0;
        for (int t = 0; t < window; ++t) {
          acc += g[t] * tmp[static_cast<std::size_t>(r + t) * ow + c];
        }
        out[static_cast<std::size_t>(r) * ow + c] = acc;
      }
    }
    return out;
  };

  std::vector<double> aa(a.size()), bb(b.size()), ab(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }

  const auto mu_a = filter(a);
  const auto mu_b = filter(b);
  const auto m_aa = filter(aa);
  const auto m_bb = filter(bb);
  const auto m_ab = filter(ab);

  double total = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double va = m_aa[i] - mu_a[i] * mu_a[i];
    const double vb = m_bb[i] - mu_b[i] * mu_b[i];
    const double cov = m_ab[i] - mu_a[i] * mu_b[i];
    const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
    const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2);
    total += num / den;
  }
  return total / static_cast<double>(mu_a.size());
}

MetricReport lf_metrics(const ComplexImage& x, const ComplexImage& ref,
                        const std::vector<LesionBox>& boxes) {
  throw_if_shape_mismatch(x, ref, "lf_metrics");
  if (boxes.empty()) throw ConfigError("lf_metrics: at least one box required");

  const double L = max_abs(ref);  // global dynamic range for all boxes
  if (L == 0.0) throw ConfigError("lf_metrics: reference is identically zero");

  MetricReport report;
  double psnr_sum = 0.0, ssim_sum = 0.0;
  int counted = 0;
  for (const LesionBox& b : boxes) {
    BoxMetrics bm;
    bm.label = b.label;
    if (b.rows() < 3 || b.cols() < 3) {
      bm.skipped = true;
      report.per_box.push_back(std::move(bm));
      continue;
    }
    const ComplexImage cx = crop(x, b);
    const ComplexImage cr = crop(ref, b);
    const int win = std::max(3, std::min({11, b.rows(), b.cols()}));
    bm.psnr_db = psnr_with_range(cx, cr, L);
    bm.ssim = ssim(cx, cr, win, L);
    psnr_sum += bm.psnr_db;
    ssim_sum += bm.ssim;
    ++counted;
    report.per_box.push_back(std::move(bm));
  }
  if (counted > 0) {
    report.lf_psnr_db = psnr_sum / counted;
    report.lf_ssim = ssim_sum / counted;
  }
  return report;
}

MetricReport evaluate(const ComplexImage& x, const ComplexImage& ref,
                      const std::vector<LesionBox>& boxes) {
  MetricReport report;
  if (!boxes.empty()) {
    report = lf_metrics(x, ref, boxes);
  }
  report.psnr_db = psnr(x, ref);
  report.ssim = ssim(x, ref);
  return report;
}

}  // namespace pamri
