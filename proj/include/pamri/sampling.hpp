#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pamri/errors.hpp"

namespace pamri {

enum class MaskMode { Lines1D, Points2D };

std::string to_string(MaskMode mode);
MaskMode mask_mode_from_string(const std::string& s);

/// k-space selector M = M1 + M2 with disjoint supports: `acs` is the fixed
/// fully sampled low-frequency part (M1), `high` the optimizable part (M2).
/// In Lines1D mode, selection units are whole phase-encode columns and every
/// column is constant in both planes. `relaxed` optionally holds a
/// probability in [0,1] per element for the high part (zero on ACS); when
/// present, the encoding operator applies it multiplicatively instead of the
/// binary high plane.
struct SamplingMask {
  MaskMode mode = MaskMode::Lines1D;
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> acs;   // h*w, 0/1
  std::vector<std::uint8_t> high;  // h*w, 0/1
  std::optional<std::vector<double>> relaxed;

  std::size_t plane_size() const {
    return static_cast<std::size_t>(height) * width;
  }

  /// Number of selection units: columns in Lines1D, pixels in Points2D.
  int units() const { return mode == MaskMode::Lines1D ? width : height * width; }

  bool unit_in_acs(int u) const;
  bool unit_in_high(int u) const;
  bool unit_selected(int u) const { return unit_in_acs(u) || unit_in_high(u); }
  void set_high_unit(int u, bool value);

  int acs_unit_count() const;
  int high_unit_count() const;
  int selected_unit_count() const { return acs_unit_count() + high_unit_count(); }

  /// Unit indices not covered by ACS, ascending. These are the optimization
  /// candidates for the high part.
  std::vector<int> candidate_units() const;

  /// Per-element multiplicative weight as seen by the encoding operator:
  /// 1 on ACS, `relaxed` value (if present) or 0/1 from `high` elsewhere.
  std::vector<double> effective_weights() const;

  /// Throws if any structural invariant is violated.
  void validate() const;
};

struct MaskBudget {
  double acceleration = 1.0;  // R
  int total_selected = 0;     // round(units / R)
  int acs_count = 0;
};

/// Budget for a mask of the given geometry: total = round(units/R), ACS
/// count matching make_acs_mask.
MaskBudget make_budget(MaskMode mode, int height, int width, double R,
                       std::optional<double> acs_fraction = std::nullopt);

/// ACS-only mask. Lines1D keeps round(f*W) center columns with f = 0.08 at
/// R=4 and 0.04 at R=8 (linear in 1/R otherwise, clamped to [0.02, 0.08], or
/// an explicit fraction); Points2D keeps the central round(0.1*h) x
/// round(0.1*w) square. Throws if the ACS alone exceeds round(units/R).
SamplingMask make_acs_mask(MaskMode mode, int height, int width, double R,
                           std::optional<double> acs_fraction = std::nullopt);

/// ACS plus uniformly drawn high-frequency units, deterministic per seed.
SamplingMask make_random_mask(const SamplingMask& acs, const MaskBudget& budget,
                              std::uint64_t seed);

/// ACS plus every R-th column (phase 0). Lines1D only.
SamplingMask make_equispaced_mask(const SamplingMask& acs, int R);

/// Monotone rescale of candidate probabilities so their mean hits
/// target_rate: scale p when mean > target, else scale complements 1-p.
std::vector<double> renormalize_probs(const std::vector<double>& probs,
                                      double target_rate);

/// Deterministic binarization: the k largest candidate probabilities become
/// the high part (ties broken by ascending candidate index).
SamplingMask binarize_topk(const SamplingMask& acs,
                           const std::vector<double>& candidate_probs, int k);

/// Portable bitmap serialization: JSON header + base64 bit planes.
std::string mask_to_json(const SamplingMask& mask);
SamplingMask mask_from_json(const std::string& text);

}  // namespace pamri
