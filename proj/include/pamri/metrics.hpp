#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pamri/field.hpp"
#include "pamri/phantom.hpp"

namespace pamri {

/// PSNR of identical images is infinite; it is reported as this cap.
inline constexpr double kPsnrSentinelDb = 300.0;

struct BoxMetrics {
  std::string label;
  double psnr_db = 0.0;
  double ssim = 0.0;
  bool skipped = false;  // box smaller than the 3x3 minimum window
};

struct MetricReport {
  double psnr_db = 0.0;
  double ssim = 0.0;
  std::optional<double> lf_psnr_db;
  std::optional<double> lf_ssim;
  std::vector<BoxMetrics> per_box;
};

/// 10 log10(L^2 / MSE) on magnitude images with L = max |ref|.
double psnr(const ComplexImage& x, const ComplexImage& ref);

/// Mean local SSIM on magnitude images: Gaussian window (default 11x11,
/// sigma 1.5), K1=0.01, K2=0.03, dynamic range L = max |ref| unless a range
/// override is given. Windows are evaluated only where they fit.
double ssim(const ComplexImage& x, const ComplexImage& ref,
            int window = 11, std::optional<double> dynamic_range = std::nullopt);

/// Lesion-focused metrics: PSNR/SSIM per cropped box (window clipped to
/// min(11, box side), minimum 3; global L) plus their unweighted means.
MetricReport lf_metrics(const ComplexImage& x, const ComplexImage& ref,
                        const std::vector<LesionBox>& boxes);

/// Full report: global metrics plus lesion-focused metrics when boxes given.
MetricReport evaluate(const ComplexImage& x, const ComplexImage& ref,
                      const std::vector<LesionBox>& boxes);

}  // namespace pamri
