#include "pamri/maskopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pamri/parallel.hpp"

namespace pamri {

MaskObjective::MaskObjective(std::vector<const SubjectData*> subjects,
                             MaskObjectiveConfig config)
    : subjects_(std::move(subjects)), config_(std::move(config)) {
  if (subjects_.empty()) {
    throw ConfigError("MaskObjective: at least one subject required");
  }
  if (config_.subjects_limit > 0 &&
      config_.subjects_limit < static_cast<int>(subjects_.size())) {
    subjects_.resize(config_.subjects_limit);
  }
}

void MaskObjective::set_fixed_maps(std::vector<AttentionMap> maps) {
  if (maps.size() != subjects_.size()) {
    throw ConfigError("MaskObjective: one fixed map per subject required");
  }
  fixed_maps_ = std::move(maps);
}

double MaskObjective::operator()(const SamplingMask& mask) const {
  double total = 0.0;
  for (std::size_t s = 0; s < subjects_.size(); ++s) {
    const SubjectData& subj = *subjects_[s];
    EncodingOperator op(mask, subj.coils);
    const MultiCoilKSpace y = op.forward(subj.gt);
    const ReconResult rec =
        reconstruct(y, op, config_.recon, config_.provider, subj.boxes);
    const AttentionMap& map =
        fixed_maps_.empty() ? rec.map_final : fixed_maps_[s];
    total += mask_loss(rec.x_final, subj.gt, map, mask, config_.lambda);
  }
  return total / static_cast<double>(subjects_.size());
}

SamplingMask greedy_select(const MaskObjective& objective,
                           const SamplingMask& acs, const MaskBudget& budget) {
  SamplingMask mask = acs;
  mask.relaxed.reset();
  const int acs_units = mask.acs_unit_count();
  if (budget.total_selected < acs_units) {
    throw ConfigError("greedy_select: budget below ACS size");
  }
  const int additions = budget.total_selected - acs_units;

  std::vector<int> remaining = mask.candidate_units();
  const int workers = objective.config().workers;

  for (int step = 0; step < additions; ++step) {
    std::vector<double> scores(remaining.size(),
                               std::numeric_limits<double>::infinity());
    parallel_for(remaining.size(), workers, [&](std::size_t i) {
      SamplingMask trial = mask;
      trial.set_high_unit(remaining[i], true);
      scores[i] = objective(trial);
    });

    // argmin with ties broken toward the lower candidate index; `remaining`
    // is ascending, so the first strict minimum wins.
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
      if (scores[i] < scores[best]) best = i;
    }
    mask.set_high_unit(remaining[best], true);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return mask;
}

SamplingMask exchange_refine(const MaskObjective& objective,
                             const SamplingMask& mask, int max_sweeps) {
  SamplingMask current = mask;
  current.relaxed.reset();
  double current_score = objective(current);

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool improved = false;
    std::vector<int> selected, unselected;
    for (int u : current.candidate_units()) {
      (current.unit_in_high(u) ? selected : unselected).push_back(u);
    }
    // First-improvement: each selected slot tries the unselected units in
    // ascending order and keeps the first strictly better swap.
    for (int s : selected) {
      if (!current.unit_in_high(s)) continue;  // already swapped out
      for (int u : unselected) {
        if (current.unit_in_high(u)) continue;  // already swapped in
        SamplingMask trial = current;
        trial.set_high_unit(s, false);
        trial.set_high_unit(u, true);
        const double score = objective(trial);
        if (score < current_score) {
          current = std::move(trial);
          current_score = score;
          improved = true;
          break;
        }
      }
    }
    if (!improved) break;
  }
  return current;
}

SamplingMask relaxed_fd_descent(
    const std::function<double(const SamplingMask&)>& objective_relaxed,
    const SamplingMask& acs, std::vector<double> init_probs, int select_k,
    const OptimizerSpec& spec, std::optional<double> target_rate) {
  if (spec.step <= 0.0 || spec.epsilon <= 0.0) {
    throw ConfigError("relaxed_fd_descent: step and epsilon must be > 0");
  }
  const std::vector<int> candidates = acs.candidate_units();
  if (init_probs.size() != candidates.size()) {
    throw ShapeError("relaxed_fd_descent: one init probability per candidate");
  }
  for (double p : init_probs) {
    if (p < 0.0 || p > 1.0) {
      throw ConfigError("relaxed_fd_descent: init probabilities in [0,1]");
    }
  }

  auto relaxed_mask = [&](const std::vector<double>& probs) {
    SamplingMask m = acs;
    std::vector<double> plane(m.plane_size(), 0.0);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const int u = candidates[i];
      if (m.mode == MaskMode::Lines1D) {
        for (int r = 0; r < m.height; ++r) {
          plane[static_cast<std::size_t>(r) * m.width + u] = probs[i];
        }
      } else {
        plane[static_cast<std::size_t>(u)] = probs[i];
      }
    }
    m.relaxed = std::move(plane);
    return m;
  };

  std::vector<double> probs = std::move(init_probs);
  std::vector<double> grad(probs.size());
  for (int it = 0; it < spec.iters; ++it) {
    for (std::size_t i = 0; i < probs.size(); ++i) {
      const double p0 = probs[i];
      auto eval_at = [&](double p) {
        std::vector<double> shifted = probs;
        shifted[i] = std::clamp(p, 0.0, 1.0);
        return objective_relaxed(relaxed_mask(shifted));
      };
      grad[i] = (eval_at(p0 + spec.epsilon) - eval_at(p0 - spec.epsilon)) /
                (2.0 * spec.epsilon);
    }
    for (std::size_t i = 0; i < probs.size(); ++i) {
      probs[i] = std::clamp(probs[i] - spec.step * grad[i], 0.0, 1.0);
    }
    if (target_rate.has_value()) {
      probs = renormalize_probs(probs, *target_rate);
    }
  }

  return binarize_topk(acs, probs, select_k);
}

MaskOptResult stage1_population(const std::vector<const SubjectData*>& subjects,
                                const SamplingMask& acs, const MaskBudget& budget,
                                const MaskObjectiveConfig& config,
                                const OptimizerSpec& optimizer) {
  const int acs_units = acs.acs_unit_count();
  if (budget.total_selected <= acs_units) {
    return {acs, true};
  }

  MaskObjectiveConfig cfg = config;
  cfg.lambda = 0.0;  // the population stage is anomaly-agnostic
  MaskObjective objective(subjects, cfg);

  switch (optimizer.kind) {
    case OptimizerSpec::Kind::Greedy:
      return {greedy_select(objective, acs, budget), false};
    case OptimizerSpec::Kind::Exchange: {
      SamplingMask m = greedy_select(objective, acs, budget);
      return {exchange_refine(objective, m, optimizer.max_sweeps), false};
    }
    case OptimizerSpec::Kind::RelaxedFd: {
      const int k = budget.total_selected - acs_units;
      const auto candidates = acs.candidate_units();
      const double rate = static_cast<double>(k) / candidates.size();
      std::vector<double> init(candidates.size(), rate);
      auto fn = [&objective](const SamplingMask& m) { return objective(m); };
      return {relaxed_fd_descent(fn, acs, init, k, optimizer, rate), false};
    }
  }
  throw ConfigError("stage1_population: unknown optimizer kind");
}

MaskOptResult stage2_personalize(const MultiCoilKSpace& acs_kspace,
                                 const SamplingMask& acs,
                                 const CoilSensitivities& coils,
                                 const std::vector<LesionBox>& boxes,
                                 const MaskBudget& budget,
                                 const MaskObjectiveConfig& config,
                                 const OptimizerSpec& optimizer,
                                 const ComplexImage* oracle_gt) {
  // The measurement must live on the ACS support only.
  if (acs_kspace.height() != acs.height || acs_kspace.width() != acs.width) {
    throw ShapeError("stage2_personalize: k-space / mask shape mismatch");
  }
  for (const auto& plane : acs_kspace.planes) {
    for (int r = 0; r < plane.height(); ++r) {
      for (int c = 0; c < plane.width(); ++c) {
        const std::size_t i = static_cast<std::size_t>(r) * plane.width() + c;
        if (!acs.acs[i] && plane.at(r, c) != cdouble{0.0, 0.0}) {
          throw ConfigError(
              "stage2_personalize: input k-space has data outside the ACS "
              "support");
        }
      }
    }
  }

  EncodingOperator op_acs(acs, coils);

  // Low-resolution prior and its attention map, pinned for the whole
  // optimization.
  const ComplexImage x_acs = op_acs.adjoint(acs_kspace);
  AttentionMap map_fixed = attention(config.provider, x_acs, boxes);

  // Surrogate ground truth: the pipeline reconstruction of the ACS
  // measurement, or the true image in oracle mode.
  SubjectData subject;
  subject.coils = coils;
  subject.boxes = boxes;
  if (oracle_gt != nullptr) {
    subject.gt = *oracle_gt;
  } else {
    subject.gt = reconstruct(acs_kspace, op_acs, config.recon, config.provider,
                             boxes)
                     .x_final;
  }

  const int acs_units = acs.acs_unit_count();
  if (budget.total_selected <= acs_units) {
    return {acs, true};
  }

  MaskObjective objective({&subject}, config);
  objective.set_fixed_maps({map_fixed});

  switch (optimizer.kind) {
    case OptimizerSpec::Kind::Greedy:
      return {greedy_select(objective, acs, budget), false};
    case OptimizerSpec::Kind::Exchange: {
      SamplingMask m = greedy_select(objective, acs, budget);
      return {exchange_refine(objective, m, optimizer.max_sweeps), false};
    }
    case OptimizerSpec::Kind::RelaxedFd: {
      const int k = budget.total_selected - acs_units;
      const auto candidates = acs.candidate_units();
      const double rate = static_cast<double>(k) / candidates.size();
      std::vector<double> init(candidates.size(), rate);
      auto fn = [&objective](const SamplingMask& m) { return objective(m); };
      return {relaxed_fd_descent(fn, acs, init, k, optimizer, rate), false};
    }
  }
  throw ConfigError("stage2_personalize: unknown optimizer kind");
}

}  // namespace pamri
