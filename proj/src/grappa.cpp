#include "pamri/grappa.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace pamri {

namespace {

int wrap(int i, int n) {
  i %= n;
  return i < 0 ? i + n : i;
}

// Patch columns that land on the sampled lattice when the target sits at
// phase d (columns = 0 mod R are sampled).
std::vector<int> sampled_col_offsets(int d, int R, int kernel_cols) {
  std::vector<int> offsets;
  const int half = kernel_cols / 2;
  for (int dc = -half; dc <= half; ++dc) {
    if (wrap(d + dc, R) == 0) offsets.push_back(dc);
  }
  return offsets;
}

void check_equispaced(const SamplingMask& mask, int R) {
  if (mask.mode != MaskMode::Lines1D) {
    throw ConfigError("grappa: only lines1d masks are supported");
  }
  bool any_missing = false;
  for (int c = 0; c < mask.width; ++c) {
    any_missing = any_missing || !mask.unit_selected(c);
  }
  if (!any_missing) return;  // fully sampled: nothing to interpolate

  for (int c = 0; c < mask.width; ++c) {
    const bool on_lattice = c % R == 0;
    if (on_lattice && !mask.unit_selected(c)) {
      throw ConfigError(
          "grappa: mask is not equispaced (lattice column " +
          std::to_string(c) + " missing); the shift-invariance assumption "
          "does not hold for this pattern");
    }
    if (mask.unit_in_high(c) && !on_lattice) {
      throw ConfigError(
          "grappa: mask is not equispaced (off-lattice column " +
          std::to_string(c) + " in the high part)");
    }
  }
}

}  // namespace

GrappaKernel grappa_calibrate(const MultiCoilKSpace& acs_block, int acs_col0,
                              int R, int kernel_rows, int kernel_cols,
                              double tikhonov_rel) {
  if (R < 2) throw ConfigError("grappa_calibrate: R must be an integer >= 2");
  if (kernel_rows < 1 || kernel_cols < 1) {
    throw ConfigError("grappa_calibrate: invalid kernel size");
  }
  const int nc = acs_block.n_coils();
  if (nc < 1) throw ConfigError("grappa_calibrate: no coil data");
  const int h = acs_block.height();
  const int acs_w = acs_block.width();
  const int row_half = kernel_rows / 2;
  const int col_half = kernel_cols / 2;

  GrappaKernel kernel;
  kernel.kernel_rows = kernel_rows;
  kernel.kernel_cols = kernel_cols;
  kernel.R = R;
  kernel.n_coils = nc;
  kernel.col_offsets.resize(R - 1);
  kernel.weights.resize(R - 1);

  for (int d = 1; d < R; ++d) {
    const auto offsets = sampled_col_offsets(d, R, kernel_cols);
    if (offsets.empty()) {
      throw ConfigError("grappa_calibrate: no sampled lattice column inside a " +
                        std::to_string(kernel_cols) + "-wide kernel at R=" +
                        std::to_string(R) + ", offset " + std::to_string(d));
    }
    kernel.col_offsets[d - 1] = offsets;
    const int n_taps = static_cast<int>(offsets.size()) * kernel_rows;
    const int n_unknowns = nc * n_taps;

    // Phase-consistent targets: ACS columns congruent to d modulo R with the
    // full patch inside the block, all interior rows.
    std::vector<int> target_cols;
    for (int cl = 0; cl < acs_w; ++cl) {
      if (wrap(acs_col0 + cl, R) != d) continue;
      bool fits = cl - col_half >= 0 && cl + col_half < acs_w;
      if (fits) target_cols.push_back(cl);
    }
    const int n_rows = std::max(0, h - 2 * row_half);
    const int n_eq = static_cast<int>(target_cols.size()) * n_rows;
    if (n_eq < n_unknowns) {
      throw NumericalError(
          "grappa_calibrate: underdetermined fit for offset " +
          std::to_string(d) + ": " + std::to_string(n_eq) + " equations for " +
          std::to_string(n_unknowns) +
          " unknowns; enlarge the ACS region or shrink the kernel");
    }

    Eigen::MatrixXcd S(n_eq, n_unknowns);
    Eigen::MatrixXcd T(n_eq, nc);
    int eq = 0;
    for (int cl : target_cols) {
      for (int r = row_half; r < h - row_half; ++r) {
        int col = 0;
        for (int sc = 0; sc < nc; ++sc) {
          for (int dc : offsets) {
            for (int dr = -row_half; dr <= row_half; ++dr) {
              S(eq, col++) = acs_block.planes[sc].at(r + dr, cl + dc);
            }
          }
        }
        for (int tc = 0; tc < nc; ++tc) {
          T(eq, tc) = acs_block.planes[tc].at(r, cl);
        }
        ++eq;
      }
    }

    Eigen::MatrixXcd gram = S.adjoint() * S;
    if (tikhonov_rel > 0.0) {
      const double damping =
          tikhonov_rel * gram.diagonal().real().sum() / n_unknowns;
      gram.diagonal().array() += damping;
    }
    const Eigen::MatrixXcd W = gram.ldlt().solve(S.adjoint() * T);
    if (!W.allFinite()) {
      throw NumericalError("grappa_calibrate: weight solve produced non-finite "
                           "values");
    }

    // Store as [target_coil][source_coil * taps + tap].
    auto& w = kernel.weights[d - 1];
    w.resize(static_cast<std::size_t>(nc) * n_unknowns);
    for (int tc = 0; tc < nc; ++tc) {
      for (int u = 0; u < n_unknowns; ++u) {
        w[static_cast<std::size_t>(tc) * n_unknowns + u] = W(u, tc);
      }
    }
  }
  return kernel;
}

GrappaKernel grappa_calibrate_from_mask(const MultiCoilKSpace& y,
                                        const SamplingMask& mask, int R,
                                        int kernel_rows, int kernel_cols,
                                        double tikhonov_rel) {
  // Locate the contiguous ACS column block.
  int first = -1, last = -1;
  for (int c = 0; c < mask.width; ++c) {
    if (mask.unit_in_acs(c)) {
      if (first < 0) first = c;
      last = c;
    } else if (first >= 0 && last >= 0 && c > last) {
      break;
    }
  }
  if (first < 0) throw ConfigError("grappa: mask has no ACS columns");
  for (int c = first; c <= last; ++c) {
    if (!mask.unit_in_acs(c)) {
      throw ConfigError("grappa: ACS columns are not contiguous");
    }
  }

  MultiCoilKSpace block;
  block.planes.reserve(y.n_coils());
  for (const auto& plane : y.planes) {
    KSpacePlane p(plane.height(), last - first + 1);
    for (int r = 0; r < plane.height(); ++r) {
      for (int c = 0; c < p.width(); ++c) {
        p.at(r, c) = plane.at(r, first + c);
      }
    }
    block.planes.push_back(std::move(p));
  }
  return grappa_calibrate(block, first, R, kernel_rows, kernel_cols,
                          tikhonov_rel);
}

MultiCoilKSpace grappa_fill(const MultiCoilKSpace& y, const SamplingMask& mask,
                            const GrappaKernel& kernel) {
  check_equispaced(mask, kernel.R);
  if (y.n_coils() != kernel.n_coils) {
    throw ShapeError("grappa_fill: coil count mismatch");
  }
  if (y.height() != mask.height || y.width() != mask.width) {
    throw ShapeError("grappa_fill: k-space / mask shape mismatch");
  }
  const int h = y.height(), w = y.width();
  const int nc = kernel.n_coils;
  const int row_half = kernel.kernel_rows / 2;

  MultiCoilKSpace filled = y;  // measured entries stay verbatim
  for (int cm = 0; cm < w; ++cm) {
    if (mask.unit_selected(cm)) continue;
    const int d = cm % kernel.R;
    if (d == 0) continue;  // lattice columns are always sampled
    const auto& offsets = kernel.col_offsets[d - 1];
    const int n_taps = static_cast<int>(offsets.size()) * kernel.kernel_rows;
    const int n_unknowns = nc * n_taps;
    const auto& wts = kernel.weights[d - 1];

    std::vector<cdouble> sources(n_unknowns);
    for (int r = 0; r < h; ++r) {
      int idx = 0;
      for (int sc = 0; sc < nc; ++sc) {
        for (int dc : offsets) {
          const int col = wrap(cm + dc, w);
          for (int dr = -row_half; dr <= row_half; ++dr) {
            sources[idx++] = y.planes[sc].at(wrap(r + dr, h), col);
          }
        }
      }
      for (int tc = 0; tc < nc; ++tc) {
        cdouble acc{0.0, 0.0};
        const cdouble* wrow = wts.data() + static_cast<std::size_t>(tc) * n_unknowns;
        for (int u = 0; u < n_unknowns; ++u) acc += wrow[u] * sources[u];
        filled.planes[tc].at(r, cm) = acc;
      }
    }
  }
  return filled;
}

ComplexImage grappa_reconstruct(const MultiCoilKSpace& y,
                                const SamplingMask& mask,
                                const GrappaKernel& kernel) {
  return zero_filled_rss(grappa_fill(y, mask, kernel));
}

ComplexImage zero_filled_rss(const MultiCoilKSpace& y) {
  if (y.n_coils() < 1) throw ConfigError("rss: no coil data");
  ComplexImage out(y.height(), y.width());
  std::vector<double> sos(out.size(), 0.0);
  for (const auto& plane : y.planes) {
    const ComplexImage img = ifft2c(plane);
    simd::active().abs2_add(sos.data(), img.data(), img.size());
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data()[i] = cdouble{std::sqrt(sos[i]), 0.0};
  }
  return out;
}

}  // namespace pamri
