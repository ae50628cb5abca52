#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "pamri/recon.hpp"

namespace pamri {

/// One simulated acquisition target.
struct SubjectData {
  ComplexImage gt;
  CoilSensitivities coils;
  std::vector<LesionBox> boxes;
};

/// How mask candidates are scored: reconstruct each subject's simulated
/// acquisition under the candidate mask with a fixed configuration and
/// average the mask loss. Deterministic; lower is better.
struct MaskObjectiveConfig {
  ReconConfig recon;
  AttentionProviderSpec provider;
  double lambda = 0.0;  // weight of the attention-focused k-space term
  int workers = 1;      // parallelism across candidate evaluations
  int subjects_limit = 0;  // 0 = use all subjects
};

class MaskObjective {
 public:
  MaskObjective(std::vector<const SubjectData*> subjects,
                MaskObjectiveConfig config);

  /// Pins the attention map used in the loss (one per subject). Without
  /// this, the map produced by the reconstruction itself is used.
  void set_fixed_maps(std::vector<AttentionMap> maps);

  double operator()(const SamplingMask& mask) const;

  const MaskObjectiveConfig& config() const { return config_; }

 private:
  std::vector<const SubjectData*> subjects_;
  MaskObjectiveConfig config_;
  std::vector<AttentionMap> fixed_maps_;
};

struct OptimizerSpec {
  enum class Kind { Greedy, Exchange, RelaxedFd };
  Kind kind = Kind::Greedy;
  int max_sweeps = 2;     // Exchange refinement after the greedy pass
  double step = 0.5;      // RelaxedFd step size
  double epsilon = 1e-2;  // RelaxedFd central-difference perturbation
  int iters = 30;         // RelaxedFd iterations
  std::uint64_t seed = 0;
};

struct MaskOptResult {
  SamplingMask mask;
  bool acs_only = false;  // budget left no room to optimize
};

/// Greedy forward selection of high-frequency units: repeatedly add the
/// candidate minimizing the objective (ties to the lowest index) until the
/// budget is reached. Candidate scores within a round may be evaluated in
/// parallel; the argmin reduction is order-independent.
SamplingMask greedy_select(const MaskObjective& objective,
                           const SamplingMask& acs, const MaskBudget& budget);

/// First-improvement swap sweeps over (selected, unselected) pairs of the
/// high part. Stops after a full sweep without improvement or max_sweeps.
SamplingMask exchange_refine(const MaskObjective& objective,
                             const SamplingMask& mask, int max_sweeps);

/// Projected finite-difference descent on a relaxed probability mask:
/// p <- clamp01(p - step * g) with central-difference g, renormalized to
/// target_rate each iteration when given, binarized top-k at the end.
SamplingMask relaxed_fd_descent(
    const std::function<double(const SamplingMask&)>& objective_relaxed,
    const SamplingMask& acs, std::vector<double> init_probs, int select_k,
    const OptimizerSpec& spec, std::optional<double> target_rate);

/// Stage 1: one population-level mask shared by all subjects, minimizing the
/// mean mask loss with lambda forced to 0 (anomaly-agnostic).
MaskOptResult stage1_population(const std::vector<const SubjectData*>& subjects,
                                const SamplingMask& acs, const MaskBudget& budget,
                                const MaskObjectiveConfig& config,
                                const OptimizerSpec& optimizer);

/// Stage 2: per-subject personalization of the high part. Only the ACS
/// k-space of the subject is available; the ground truth is replaced by a
/// surrogate (pipeline reconstruction of the ACS measurement) unless
/// oracle_gt provides the real one. The attention map is derived from the
/// zero-filled ACS prior and pinned for the whole optimization.
MaskOptResult stage2_personalize(const MultiCoilKSpace& acs_kspace,
                                 const SamplingMask& acs,
                                 const CoilSensitivities& coils,
                                 const std::vector<LesionBox>& boxes,
                                 const MaskBudget& budget,
                                 const MaskObjectiveConfig& config,
                                 const OptimizerSpec& optimizer,
                                 const ComplexImage* oracle_gt = nullptr);

}  // namespace pamri
