#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pamri/maskopt.hpp"

namespace pamri {

enum class MaskStrategy { NoLearn, Equispaced, GlobalLearn, AnomalyAware, FromFile };

std::string to_string(MaskStrategy s);
MaskStrategy mask_strategy_from_string(const std::string& s);

struct MaskConfig {
  MaskStrategy strategy = MaskStrategy::NoLearn;
  double R = 4.0;
  MaskMode mode = MaskMode::Lines1D;
  std::optional<double> acs_fraction;
  std::string file;     // FromFile
  bool oracle = false;  // AnomalyAware: personalize against the true image
};

/// Procedurally generated cohort: `count` phantoms with randomized lesions.
struct PhantomSuite {
  int count = 1;
  int height = 64;
  int width = 64;
  int lesions_per_subject = 1;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  int coils = 4;

  // Exactly one subject source.
  std::vector<PhantomSpec> phantoms;
  std::string phantom_dir;
  std::optional<PhantomSuite> phantom_suite;

  MaskConfig mask;
  ReconConfig recon;
  AttentionProviderSpec provider;
  OptimizerSpec optimizer;

  // Optional cheaper reconstruction used inside mask optimization.
  std::optional<ReconConfig> objective_recon;
  int objective_subjects_limit = 0;

  double noise_sigma = 0.0;  // relative to max |F(gt)|; 0 disables
  std::string outputs;
  int workers = 0;

  std::vector<double> ablate_accelerations = {4.0, 8.0};
  double grappa_tikhonov = 1e-6;

  MaskObjectiveConfig objective_config() const;
};

/// Parses the JSON config. Unknown keys anywhere are rejected.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace pamri
