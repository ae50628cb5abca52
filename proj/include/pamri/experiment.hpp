#pragma once

#include <string>
#include <vector>

#include "pamri/config.hpp"
#include "pamri/metrics.hpp"

namespace pamri {

/// One metrics CSV row of a pipeline run.
struct RunRow {
  int subject = 0;
  std::string provider;  // only written by the ablation grid
  std::string mask_strategy;
  double R = 0.0;
  MetricReport report;
  bool zero_provider_collapse = false;
};

/// Loads / generates the subject cohort described by the config.
std::vector<SubjectData> prepare_subjects(const ExperimentConfig& cfg);

/// Writes ground-truth arrays, coil maps, lesion boxes and previews.
void cmd_phantom(const ExperimentConfig& cfg, const std::string& out_dir);

/// Full pipeline per subject: mask per strategy, simulated acquisition,
/// reconstruction, metrics. Writes metrics.csv, recon arrays, mask bitmaps,
/// error previews and per-stage diagnostics. Returns the CSV rows.
std::vector<RunRow> cmd_run(const ExperimentConfig& cfg,
                            const std::string& out_dir);

/// Variant grid {zero, boxes} x {no_learn, global_learn, anomaly_aware} x R.
std::vector<RunRow> cmd_ablate(const ExperimentConfig& cfg,
                               const std::string& out_dir);

/// Equispaced undersampling baseline: kernel calibration + interpolation,
/// compared against the zero-filled combine.
std::vector<RunRow> cmd_grappa(const ExperimentConfig& cfg,
                               const std::string& out_dir);

/// Metric report for two array files (optionally with lesion boxes).
MetricReport cmd_metrics(const std::string& recon_path,
                         const std::string& ref_path,
                         const std::string& boxes_path);

std::string run_csv(const std::vector<RunRow>& rows, bool with_provider);

}  // namespace pamri
