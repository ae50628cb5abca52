#include "pamri/phantom.hpp"

#include <algorithm>
#include <cmath>

namespace pamri {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Modified Shepp-Logan ellipses (normalized [-1,1] coordinates):
// {intensity, half-axis x, half-axis y, center x, center y, angle deg}.
struct Ellipse {
  double value, ax, ay, cx, cy, angle_deg;
};

constexpr Ellipse kSheppLogan[] = {
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
    {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},
    {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
    {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},
    {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
    {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},
    {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
    {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},
    {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
};

// Cosine taper over the outermost one-pixel band of the lesion ellipse.
double lesion_weight(double rho, double edge_rho) {
  if (rho >= 1.0) return 0.0;
  if (rho <= edge_rho) return 1.0;
  return 0.5 * (1.0 + std::cos(kPi * (rho - edge_rho) / (1.0 - edge_rho)));
}

}  // namespace

std::pair<ComplexImage, std::vector<LesionBox>> generate_phantom(
    const PhantomSpec& spec) {
  ComplexImage img(spec.height, spec.width);
  const double cy = (spec.height - 1) / 2.0;
  const double cx = (spec.width - 1) / 2.0;
  const double sy = 2.0 / spec.height;
  const double sx = 2.0 / spec.width;

  double maxval = 0.0;
  for (int r = 0; r < spec.height; ++r) {
    const double y = (r - cy) * sy;
    for (int c = 0; c < spec.width; ++c) {
      const double x = (c - cx) * sx;
      double v = 0.0;
      for (const Ellipse& e : kSheppLogan) {
        const double phi = e.angle_deg * kPi / 180.0;
        const double dx = x - e.cx;
        const double dy = y - e.cy;
        const double xr = dx * std::cos(phi) + dy * std::sin(phi);
        const double yr = -dx * std::sin(phi) + dy * std::cos(phi);
        if ((xr * xr) / (e.ax * e.ax) + (yr * yr) / (e.ay * e.ay) <= 1.0) {
          v += e.value;
        }
      }
      v = std::max(v, 0.0);
      img.at(r, c) = cdouble{v, 0.0};
      maxval = std::max(maxval, v);
    }
  }
  if (maxval > 1.0) {
    const double inv = 1.0 / maxval;
    for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] *= inv;
  }

  std::vector<LesionBox> boxes;
  boxes.reserve(spec.lesions.size());
  for (std::size_t li = 0; li < spec.lesions.size(); ++li) {
    const LesionSpec& les = spec.lesions[li];
    if (les.radius_row < 1.0 || les.radius_col < 1.0 ||
        std::abs(les.intensity_delta) > 1.0) {
      throw ConfigError("lesion " + std::to_string(li) +
                        ": radii must be >= 1 px and |intensity_delta| <= 1");
    }
    const double r0 = les.center_row - les.radius_row;
    const double r1 = les.center_row + les.radius_row;
    const double c0 = les.center_col - les.radius_col;
    const double c1 = les.center_col + les.radius_col;
    if (r0 < 0.0 || c0 < 0.0 || r1 > spec.height - 1 || c1 > spec.width - 1) {
      throw ConfigError("lesion " + std::to_string(li) +
                        " extends outside the image bounds");
    }

    const double edge_rho =
        std::max(0.0, 1.0 - 1.0 / std::min(les.radius_row, les.radius_col));
    const int rmin = static_cast<int>(std::ceil(r0));
    const int rmax = static_cast<int>(std::floor(r1));
    const int cmin = static_cast<int>(std::ceil(c0));
    const int cmax = static_cast<int>(std::floor(c1));
    for (int r = rmin; r <= rmax; ++r) {
      for (int c = cmin; c <= cmax; ++c) {
        const double dr = (r - les.center_row) / les.radius_row;
        const double dc = (c - les.center_col) / les.radius_col;
        const double rho = std::sqrt(dr * dr + dc * dc);
        const double wgt = lesion_weight(rho, edge_rho);
        if (wgt > 0.0) {
          img.at(r, c) += cdouble{les.intensity_delta * wgt, 0.0};
        }
      }
    }
    boxes.push_back({rmin, rmax, cmin, cmax, les.label});
  }

  return {std::move(img), std::move(boxes)};
}

CoilSensitivities generate_coil_maps(int n_coils, int height, int width) {
  if (n_coils < 1) throw ConfigError("generate_coil_maps: n_coils must be >= 1");

  CoilSensitivities coils;
  coils.maps.reserve(n_coils);

  const double cy = (height - 1) / 2.0;
  const double cx = (width - 1) / 2.0;
  // Broad profiles so neighbouring coils overlap strongly.
  const double sigma = 0.6 * std::max(height, width);

  for (int c = 0; c < n_coils; ++c) {
    const double theta = 2.0 * kPi * c / n_coils;
    const double ccy = cy + cy * std::sin(theta);
    const double ccx = cx + cx * std::cos(theta);
    // Gentle per-coil linear phase: at most half a cycle across the field.
    const double pr = 0.5 * std::cos(theta);
    const double pc = 0.5 * std::sin(theta);

    ComplexImage map(height, width);
    for (int r = 0; r < height; ++r) {
      for (int col = 0; col < width; ++col) {
        const double d2 = (r - ccy) * (r - ccy) + (col - ccx) * (col - ccx);
        const double mag = std::exp(-d2 / (2.0 * sigma * sigma));
        const double phase =
            2.0 * kPi * (pr * r / height + pc * col / width);
        map.at(r, col) = cdouble{mag * std::cos(phase), mag * std::sin(phase)};
      }
    }
    coils.maps.push_back(std::move(map));
  }

  // Joint SOS normalization; Gaussian magnitudes are strictly positive, so
  // the per-pixel norm never vanishes.
  for (int r = 0; r < height; ++r) {
    for (int col = 0; col < width; ++col) {
      double sos = 0.0;
      for (const auto& m : coils.maps) sos += std::norm(m.at(r, col));
      const double inv = 1.0 / std::sqrt(sos);
      for (auto& m : coils.maps) m.at(r, col) *= inv;
    }
  }

  return coils;
}

}  // namespace pamri
