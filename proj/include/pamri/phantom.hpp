#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pamri/field.hpp"

namespace pamri {

/// Additive elliptical lesion. Coordinates are in pixels; the ellipse edge
/// gets a one-pixel cosine taper so lesions carry high-frequency content.
struct LesionSpec {
  double center_row = 0.0;
  double center_col = 0.0;
  double radius_row = 1.0;
  double radius_col = 1.0;
  double intensity_delta = 0.0;  // |delta| <= 1
  std::string label;
};

struct PhantomSpec {
  int height = 64;
  int width = 64;
  std::vector<LesionSpec> lesions;
  std::uint64_t seed = 0;
};

/// Tight axis-aligned bounds of a lesion ellipse, inclusive indices.
struct LesionBox {
  int row_min = 0, row_max = 0;
  int col_min = 0, col_max = 0;
  std::string label;

  int rows() const { return row_max - row_min + 1; }
  int cols() const { return col_max - col_min + 1; }
};

/// Per-coil complex sensitivity maps, jointly normalized so that
/// sum_c |S_c|^2 == 1 at every pixel.
struct CoilSensitivities {
  std::vector<ComplexImage> maps;

  int n_coils() const { return static_cast<int>(maps.size()); }
  int height() const { return maps.empty() ? 0 : maps.front().height(); }
  int width() const { return maps.empty() ? 0 : maps.front().width(); }
};

/// Shepp-Logan style base image in [0,1] plus the spec's lesions; returns the
/// image and one tight bounding box per lesion. Deterministic.
std::pair<ComplexImage, std::vector<LesionBox>> generate_phantom(
    const PhantomSpec& spec);

/// Smooth analytic coil profiles (Gaussian magnitude around equally spaced
/// border points, linear phase ramps), SOS-normalized.
CoilSensitivities generate_coil_maps(int n_coils, int height, int width);

}  // namespace pamri
