#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pamri/field.hpp"
#include "pamri/phantom.hpp"

namespace pamri {

/// Classical plug-in denoisers standing in for a learned image prior.
struct DenoiserSpec {
  enum class Kind { Identity, GaussianBlur, TvProx, DctSoftThreshold };
  Kind kind = Kind::Identity;
  double sigma = 1.0;    // GaussianBlur
  double weight = 0.05;  // TvProx regularization strength
  int inner_iters = 20;  // TvProx dual iterations
  double tau = 0.01;     // DctSoftThreshold
};

ComplexImage denoise(const DenoiserSpec& spec, const ComplexImage& x);

/// Scalar attention field in [0,1] marking regions of interest.
struct AttentionMap {
  int height = 0;
  int width = 0;
  std::vector<double> weights;

  double at(int r, int c) const {
    return weights[static_cast<std::size_t>(r) * width + c];
  }
  bool all_zero() const;
};

/// Deterministic attention providers standing in for a learned detector.
struct AttentionProviderSpec {
  enum class Kind { Zero, Boxes, GaussianBlobs, FromFile };
  Kind kind = Kind::Zero;
  double feather_px = 0.0;                              // Boxes
  std::vector<std::pair<double, double>> blob_centers;  // GaussianBlobs (r,c)
  double blob_sigma = 4.0;
  std::string path;  // FromFile
};

/// Builds the attention map for the current image estimate. `x_global` is
/// part of the contract for learned providers; the built-in deterministic
/// kinds derive the map from the boxes / blob geometry alone.
AttentionMap attention(const AttentionProviderSpec& spec,
                       const ComplexImage& x_global,
                       const std::vector<LesionBox>& boxes);

/// Attention-gated high-boost sharpening: U = x + map o (HB(x) - x) with
/// HB(x) = x + alpha (x - blur(x, sigma)).
struct EnhancerSpec {
  double alpha = 0.5;
  double sigma = 1.0;
};

ComplexImage enhance(const EnhancerSpec& spec, const AttentionMap& map,
                     const ComplexImage& x);

/// Separable Gaussian blur with reflected boundaries, applied to real and
/// imaginary channels. sigma == 0 is the identity.
ComplexImage gaussian_blur(const ComplexImage& x, double sigma);

/// Isotropic total variation of the magnitude-free real/imag channels
/// (forward differences); diagnostic used by the TV prox tests.
double total_variation(const ComplexImage& x);

}  // namespace pamri
