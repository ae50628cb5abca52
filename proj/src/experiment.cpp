#include "pamri/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "pamri/grappa.hpp"
#include "pamri/io.hpp"
#include "pamri/parallel.hpp"
#include "pamri/rng.hpp"

namespace pamri {

namespace fs = std::filesystem;

namespace {

std::string subject_tag(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", index);
  return buf;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "'");
}

PhantomSpec random_phantom_spec(const PhantomSuite& suite, int index) {
  PhantomSpec spec;
  spec.height = suite.height;
  spec.width = suite.width;
  spec.seed = Rng::mix(suite.seed, static_cast<std::uint64_t>(index));
  Rng rng(spec.seed);
  for (int l = 0; l < suite.lesions_per_subject; ++l) {
    LesionSpec les;
    les.radius_row = 2.0 + rng.unit() * 3.0;  // 2..5 px
    les.radius_col = 2.0 + rng.unit() * 3.0;
    // Keep lesions inside the skull area (central ~60% of the field).
    const double margin_r = suite.height * 0.2 + les.radius_row + 1.0;
    const double margin_c = suite.width * 0.2 + les.radius_col + 1.0;
    les.center_row = margin_r + rng.unit() * (suite.height - 2.0 * margin_r);
    les.center_col = margin_c + rng.unit() * (suite.width - 2.0 * margin_c);
    les.intensity_delta = 0.15 + rng.unit() * 0.2;  // bright lesions
    les.label = "lesion" + std::to_string(l);
    spec.lesions.push_back(les);
  }
  return spec;
}

MultiCoilKSpace add_kspace_noise(MultiCoilKSpace y, const ComplexImage& gt,
                                 const std::vector<double>& weights,
                                 double sigma_rel, std::uint64_t seed) {
  if (sigma_rel <= 0.0) return y;
  const KSpacePlane full = fft2c(gt);
  double peak = 0.0;
  for (std::size_t i = 0; i < full.size(); ++i) {
    peak = std::max(peak, std::abs(full.data()[i]));
  }
  const double sigma = sigma_rel * peak;
  Rng rng(seed);
  for (auto& plane : y.planes) {
    for (std::size_t i = 0; i < plane.size(); ++i) {
      if (weights[i] > 0.0) {
        plane.data()[i] += weights[i] * sigma *
                           cdouble{rng.gaussian(), rng.gaussian()};
      }
    }
  }
  return y;
}

ComplexImage error_map(const ComplexImage& x, const ComplexImage& gt) {
  ComplexImage err(x.height(), x.width());
  for (std::size_t i = 0; i < x.size(); ++i) {
    err.data()[i] = cdouble{std::abs(x.data()[i] - gt.data()[i]), 0.0};
  }
  return err;
}

std::string diagnostics_csv(const std::vector<StageDiagnostics>& stages) {
  std::string csv = "stage,cg_iters,residual,primal_res,dual_res\n";
  for (const auto& d : stages) {
    csv += std::to_string(d.stage) + "," +
           std::to_string(d.dn_cg_iters + d.pa_cg_iters) + "," +
           format_double(d.dn_cg_residual) + "," +
           format_double(d.primal_residual) + "," +
           format_double(d.dual_residual) + "\n";
  }
  return csv;
}

struct SubjectOutput {
  RunRow row;
  ComplexImage recon;
  SamplingMask mask;
  std::vector<StageDiagnostics> diagnostics;
};

/// Shared mask for strategies that do not personalize, empty optional for
/// anomaly_aware (computed per subject).
std::optional<SamplingMask> shared_mask_for(
    const ExperimentConfig& cfg, const std::vector<SubjectData>& subjects,
    double R) {
  const int h = subjects.front().gt.height();
  const int w = subjects.front().gt.width();
  const SamplingMask acs =
      make_acs_mask(cfg.mask.mode, h, w, R, cfg.mask.acs_fraction);
  const MaskBudget budget =
      make_budget(cfg.mask.mode, h, w, R, cfg.mask.acs_fraction);

  switch (cfg.mask.strategy) {
    case MaskStrategy::NoLearn:
      return make_random_mask(acs, budget, Rng::mix(cfg.seed, 0x6d61736bULL));
    case MaskStrategy::Equispaced: {
      const int ri = static_cast<int>(std::lround(R));
      if (std::abs(R - ri) > 1e-9) {
        throw ConfigError("equispaced strategy requires an integer R");
      }
      return make_equispaced_mask(acs, ri);
    }
    case MaskStrategy::GlobalLearn: {
      std::vector<const SubjectData*> ptrs;
      for (const auto& s : subjects) ptrs.push_back(&s);
      return stage1_population(ptrs, acs, budget, cfg.objective_config(),
                               cfg.optimizer)
          .mask;
    }
    case MaskStrategy::FromFile:
      return mask_from_json(read_text_file(cfg.mask.file));
    case MaskStrategy::AnomalyAware:
      return std::nullopt;
  }
  throw ConfigError("unknown mask strategy");
}

SubjectOutput run_subject(const ExperimentConfig& cfg,
                          const SubjectData& subject, int index, double R,
                          const std::optional<SamplingMask>& shared_mask,
                          const AttentionProviderSpec& provider) {
  const int h = subject.gt.height();
  const int w = subject.gt.width();

  SamplingMask mask;
  if (shared_mask.has_value()) {
    mask = *shared_mask;
  } else {
    // Personalized: acquire the ACS region, then optimize the high part.
    const SamplingMask acs =
        make_acs_mask(cfg.mask.mode, h, w, R, cfg.mask.acs_fraction);
    const MaskBudget budget =
        make_budget(cfg.mask.mode, h, w, R, cfg.mask.acs_fraction);
    EncodingOperator op_acs(acs, subject.coils);
    MultiCoilKSpace acs_kspace = add_kspace_noise(
        op_acs.forward(subject.gt), subject.gt, acs.effective_weights(),
        cfg.noise_sigma, Rng::mix(cfg.seed, 0xac500000ULL + index));
    MaskObjectiveConfig obj = cfg.objective_config();
    obj.provider = provider;
    mask = stage2_personalize(acs_kspace, acs, subject.coils, subject.boxes,
                              budget, obj, cfg.optimizer,
                              cfg.mask.oracle ? &subject.gt : nullptr)
               .mask;
  }

  EncodingOperator op(mask, subject.coils);
  const MultiCoilKSpace y = add_kspace_noise(
      op.forward(subject.gt), subject.gt, mask.effective_weights(),
      cfg.noise_sigma, Rng::mix(cfg.seed, 0x59000000ULL + index));

  ReconResult rec = reconstruct(y, op, cfg.recon, provider, subject.boxes);

  SubjectOutput out;
  out.row.subject = index;
  out.row.mask_strategy = to_string(cfg.mask.strategy);
  out.row.R = R;
  out.row.report = evaluate(rec.x_final, subject.gt, subject.boxes);
  out.recon = std::move(rec.x_final);
  out.mask = std::move(mask);
  out.diagnostics = std::move(rec.per_stage);
  return out;
}

std::string csv_cell(const std::optional<double>& v) {
  return v.has_value() ? format_double(*v) : std::string{};
}

}  // namespace

std::vector<SubjectData> prepare_subjects(const ExperimentConfig& cfg) {
  std::vector<PhantomSpec> specs;
  std::vector<SubjectData> subjects;

  if (!cfg.phantom_dir.empty()) {
    // Directory layout as produced by cmd_phantom: gt_###.c128(.json) plus
    // boxes_###.json.
    for (int i = 0;; ++i) {
      const std::string base = cfg.phantom_dir + "/gt_" + subject_tag(i);
      if (!fs::exists(base + ".json")) break;
      SubjectData s;
      s.gt = load_complex_array(base);
      const std::string boxes = cfg.phantom_dir + "/boxes_" + subject_tag(i) + ".json";
      if (fs::exists(boxes)) s.boxes = load_boxes_json(boxes);
      s.coils = generate_coil_maps(cfg.coils, s.gt.height(), s.gt.width());
      subjects.push_back(std::move(s));
    }
    if (subjects.empty()) {
      throw ConfigError("phantom_dir '" + cfg.phantom_dir +
                        "' contains no gt_###.c128 arrays");
    }
    return subjects;
  }

  if (cfg.phantom_suite.has_value()) {
    for (int i = 0; i < cfg.phantom_suite->count; ++i) {
      specs.push_back(random_phantom_spec(*cfg.phantom_suite, i));
    }
  } else {
    specs = cfg.phantoms;
  }

  subjects.resize(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    auto [gt, boxes] = generate_phantom(specs[i]);
    subjects[i].gt = std::move(gt);
    subjects[i].boxes = std::move(boxes);
    subjects[i].coils =
        generate_coil_maps(cfg.coils, specs[i].height, specs[i].width);
  }
  return subjects;
}

void cmd_phantom(const ExperimentConfig& cfg, const std::string& out_dir) {
  ensure_dir(out_dir);
  const std::vector<SubjectData> subjects = prepare_subjects(cfg);
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    const std::string tag = subject_tag(static_cast<int>(i));
    save_complex_array(out_dir + "/gt_" + tag, subjects[i].gt);
    save_boxes_json(out_dir + "/boxes_" + tag + ".json", subjects[i].boxes);
    save_magnitude_pgm(out_dir + "/gt_" + tag + ".pgm", subjects[i].gt);
    for (int c = 0; c < subjects[i].coils.n_coils(); ++c) {
      save_complex_array(out_dir + "/coil_" + tag + "_" + std::to_string(c),
                         subjects[i].coils.maps[c]);
    }
  }
}

std::string run_csv(const std::vector<RunRow>& rows, bool with_provider) {
  std::string csv = with_provider
                        ? "subject,provider,mask_strategy,R,psnr,ssim,lf_psnr,"
                          "lf_ssim,zero_provider_collapse\n"
                        : "subject,mask_strategy,R,psnr,ssim,lf_psnr,lf_ssim\n";
  for (const RunRow& r : rows) {
    csv += std::to_string(r.subject) + ",";
    if (with_provider) csv += r.provider + ",";
    csv += r.mask_strategy + "," + format_double(r.R) + "," +
           format_double(r.report.psnr_db) + "," + format_double(r.report.ssim) +
           "," + csv_cell(r.report.lf_psnr_db) + "," +
           csv_cell(r.report.lf_ssim);
    if (with_provider) {
      csv += std::string(",") + (r.zero_provider_collapse ? "1" : "0");
    }
    csv += "\n";
  }
  return csv;
}

std::vector<RunRow> cmd_run(const ExperimentConfig& cfg,
                            const std::string& out_dir) {
  ensure_dir(out_dir);
  const std::vector<SubjectData> subjects = prepare_subjects(cfg);
  const double R = cfg.mask.R;
  const auto shared_mask = shared_mask_for(cfg, subjects, R);

  std::vector<SubjectOutput> outputs(subjects.size());
  // Subjects run in parallel; results are collected per index and written in
  // subject order afterwards, so output bytes do not depend on scheduling.
  parallel_for(subjects.size(), worker_count(cfg.workers), [&](std::size_t i) {
    outputs[i] = run_subject(cfg, subjects[i], static_cast<int>(i), R,
                             shared_mask, cfg.provider);
  });

  std::vector<RunRow> rows;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const std::string tag = subject_tag(static_cast<int>(i));
    save_complex_array(out_dir + "/recon_" + tag, outputs[i].recon);
    save_magnitude_pgm(out_dir + "/recon_" + tag + ".pgm", outputs[i].recon);
    save_magnitude_pgm(out_dir + "/error_" + tag + ".pgm",
                       error_map(outputs[i].recon, subjects[i].gt));
    write_text_file(out_dir + "/mask_" + tag + ".json",
                    mask_to_json(outputs[i].mask) + "\n");
    write_text_file(out_dir + "/diagnostics_" + tag + ".csv",
                    diagnostics_csv(outputs[i].diagnostics));
    rows.push_back(outputs[i].row);
  }
  write_text_file(out_dir + "/metrics.csv", run_csv(rows, false));
  return rows;
}

std::vector<RunRow> cmd_ablate(const ExperimentConfig& cfg,
                               const std::string& out_dir) {
  ensure_dir(out_dir);
  const std::vector<SubjectData> subjects = prepare_subjects(cfg);

  const std::vector<AttentionProviderSpec::Kind> provider_kinds = {
      AttentionProviderSpec::Kind::Zero, AttentionProviderSpec::Kind::Boxes};
  const std::vector<MaskStrategy> strategies = {MaskStrategy::NoLearn,
                                                MaskStrategy::GlobalLearn,
                                                MaskStrategy::AnomalyAware};

  std::vector<RunRow> rows;
  for (const auto pk : provider_kinds) {
    AttentionProviderSpec provider = cfg.provider;
    provider.kind = pk;
    const std::string provider_name =
        pk == AttentionProviderSpec::Kind::Zero ? "zero" : "boxes";

    for (const MaskStrategy strategy : strategies) {
      for (const double R : cfg.ablate_accelerations) {
        ExperimentConfig variant = cfg;
        variant.mask.strategy = strategy;
        variant.mask.R = R;
        variant.provider = provider;

        const auto shared_mask = shared_mask_for(variant, subjects, R);
        std::vector<SubjectOutput> outputs(subjects.size());
        parallel_for(subjects.size(), worker_count(cfg.workers),
                     [&](std::size_t i) {
                       outputs[i] =
                           run_subject(variant, subjects[i],
                                       static_cast<int>(i), R, shared_mask,
                                       provider);
                     });
        for (auto& out : outputs) {
          out.row.provider = provider_name;
          out.row.zero_provider_collapse =
              pk == AttentionProviderSpec::Kind::Zero &&
              strategy == MaskStrategy::AnomalyAware;
          rows.push_back(out.row);
        }
      }
    }
  }
  write_text_file(out_dir + "/ablation.csv", run_csv(rows, true));
  return rows;
}

std::vector<RunRow> cmd_grappa(const ExperimentConfig& cfg,
                               const std::string& out_dir) {
  ensure_dir(out_dir);
  const std::vector<SubjectData> subjects = prepare_subjects(cfg);
  const int R = static_cast<int>(std::lround(cfg.mask.R));
  if (std::abs(cfg.mask.R - R) > 1e-9 || R < 2) {
    throw ConfigError("grappa requires an integer acceleration R >= 2");
  }

  std::vector<RunRow> rows;
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    const SubjectData& subject = subjects[i];
    const SamplingMask acs =
        make_acs_mask(cfg.mask.mode, subject.gt.height(), subject.gt.width(),
                      cfg.mask.R, cfg.mask.acs_fraction);
    const SamplingMask mask = make_equispaced_mask(acs, R);
    EncodingOperator op(mask, subject.coils);
    const MultiCoilKSpace y = add_kspace_noise(
        op.forward(subject.gt), subject.gt, mask.effective_weights(),
        cfg.noise_sigma, Rng::mix(cfg.seed, 0x59000000ULL + i));

    const GrappaKernel kernel =
        grappa_calibrate_from_mask(y, mask, R, 5, 5, cfg.grappa_tikhonov);
    const ComplexImage grappa_img = grappa_reconstruct(y, mask, kernel);
    const ComplexImage zf_img = zero_filled_rss(y);

    const std::string tag = subject_tag(static_cast<int>(i));
    save_complex_array(out_dir + "/grappa_" + tag, grappa_img);
    save_magnitude_pgm(out_dir + "/grappa_" + tag + ".pgm", grappa_img);

    RunRow grow;
    grow.subject = static_cast<int>(i);
    grow.mask_strategy = "grappa";
    grow.R = cfg.mask.R;
    grow.report = evaluate(grappa_img, subject.gt, subject.boxes);
    rows.push_back(grow);

    RunRow zrow = grow;
    zrow.mask_strategy = "zero_filled";
    zrow.report = evaluate(zf_img, subject.gt, subject.boxes);
    rows.push_back(zrow);
  }
  write_text_file(out_dir + "/grappa.csv", run_csv(rows, false));
  return rows;
}

MetricReport cmd_metrics(const std::string& recon_path,
                         const std::string& ref_path,
                         const std::string& boxes_path) {
  const ComplexImage x = load_complex_array(recon_path);
  const ComplexImage ref = load_complex_array(ref_path);
  std::vector<LesionBox> boxes;
  if (!boxes_path.empty()) boxes = load_boxes_json(boxes_path);
  return evaluate(x, ref, boxes);
}

}  // namespace pamri
