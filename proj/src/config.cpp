#include "pamri/config.hpp"

#include <set>

#include "json.hpp"
#include "pamri/io.hpp"
#include "pamri/parallel.hpp"

namespace pamri {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::set<std::string>& allowed,
                  const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) {
      throw ConfigError(where + ": unknown key '" + key + "'");
    }
  }
}

CGParams parse_cg(const json& j) {
  require_keys(j, {"tol", "max_iter"}, "recon.cg");
  CGParams cg;
  cg.tol = j.value("tol", cg.tol);
  cg.max_iter = j.value("max_iter", cg.max_iter);
  return cg;
}

DenoiserSpec parse_denoiser(const json& j) {
  require_keys(j, {"kind", "sigma", "weight", "iters", "tau"}, "denoiser");
  DenoiserSpec d;
  const std::string kind = j.value("kind", "identity");
  if (kind == "identity") {
    d.kind = DenoiserSpec::Kind::Identity;
  } else if (kind == "gaussian_blur") {
    d.kind = DenoiserSpec::Kind::GaussianBlur;
    d.sigma = j.value("sigma", d.sigma);
  } else if (kind == "tv_prox") {
    d.kind = DenoiserSpec::Kind::TvProx;
    d.weight = j.value("weight", d.weight);
    d.inner_iters = j.value("iters", d.inner_iters);
  } else if (kind == "dct_soft_threshold") {
    d.kind = DenoiserSpec::Kind::DctSoftThreshold;
    d.tau = j.value("tau", d.tau);
  } else {
    throw ConfigError("denoiser: unknown kind '" + kind + "'");
  }
  return d;
}

EnhancerSpec parse_enhancer(const json& j) {
  require_keys(j, {"alpha", "sigma"}, "enhancer");
  EnhancerSpec e;
  e.alpha = j.value("alpha", e.alpha);
  e.sigma = j.value("sigma", e.sigma);
  return e;
}

ReconConfig parse_recon(const json& j) {
  require_keys(j,
               {"K", "n_inner", "mu1", "mu2", "rho", "gamma", "lambda", "cg",
                "denoiser", "enhancer"},
               "recon");
  ReconConfig r;
  r.stages = j.value("K", r.stages);
  r.admm_iters = j.value("n_inner", r.admm_iters);
  r.mu1 = j.value("mu1", r.mu1);
  r.mu2 = j.value("mu2", r.mu2);
  r.rho = j.value("rho", r.rho);
  r.lambda = j.value("lambda", r.lambda);
  if (j.contains("gamma")) {
    const auto& g = j.at("gamma");
    if (!g.is_array() || g.size() != 3) {
      throw ConfigError("recon.gamma: expected [gamma1, gamma2, gamma3]");
    }
    for (int i = 0; i < 3; ++i) r.gamma[i] = g[i].get<double>();
  }
  if (j.contains("cg")) r.cg = parse_cg(j.at("cg"));
  if (j.contains("denoiser")) r.denoiser = parse_denoiser(j.at("denoiser"));
  if (j.contains("enhancer")) r.enhancer = parse_enhancer(j.at("enhancer"));
  r.validate();
  return r;
}

AttentionProviderSpec parse_provider(const json& j) {
  require_keys(j, {"kind", "feather", "centers", "sigma", "path"}, "provider");
  AttentionProviderSpec p;
  const std::string kind = j.value("kind", "zero");
  if (kind == "zero") {
    p.kind = AttentionProviderSpec::Kind::Zero;
  } else if (kind == "boxes") {
    p.kind = AttentionProviderSpec::Kind::Boxes;
    p.feather_px = j.value("feather", p.feather_px);
  } else if (kind == "gaussian_blobs") {
    p.kind = AttentionProviderSpec::Kind::GaussianBlobs;
    p.blob_sigma = j.value("sigma", p.blob_sigma);
    if (j.contains("centers")) {
      for (const auto& c : j.at("centers")) {
        if (!c.is_array() || c.size() != 2) {
          throw ConfigError("provider.centers: expected [row, col] pairs");
        }
        p.blob_centers.emplace_back(c[0].get<double>(), c[1].get<double>());
      }
    }
  } else if (kind == "from_file") {
    p.kind = AttentionProviderSpec::Kind::FromFile;
    p.path = j.at("path").get<std::string>();
  } else {
    throw ConfigError("provider: unknown kind '" + kind + "'");
  }
  return p;
}

OptimizerSpec parse_optimizer(const json& j) {
  require_keys(j, {"kind", "max_sweeps", "step", "epsilon", "iters", "seed"},
               "optimizer");
  OptimizerSpec o;
  const std::string kind = j.value("kind", "greedy");
  if (kind == "greedy") {
    o.kind = OptimizerSpec::Kind::Greedy;
  } else if (kind == "exchange") {
    o.kind = OptimizerSpec::Kind::Exchange;
    o.max_sweeps = j.value("max_sweeps", o.max_sweeps);
  } else if (kind == "relaxed_fd") {
    o.kind = OptimizerSpec::Kind::RelaxedFd;
    o.step = j.value("step", o.step);
    o.epsilon = j.value("epsilon", o.epsilon);
    o.iters = j.value("iters", o.iters);
  } else {
    throw ConfigError("optimizer: unknown kind '" + kind + "'");
  }
  o.seed = j.value("seed", o.seed);
  return o;
}

MaskConfig parse_mask(const json& j) {
  require_keys(j, {"strategy", "R", "mode", "acs_fraction", "file", "oracle"},
               "mask");
  MaskConfig m;
  m.strategy = mask_strategy_from_string(j.value("strategy", "no_learn"));
  m.R = j.value("R", m.R);
  if (m.R <= 1.0) throw ConfigError("mask.R must be > 1");
  m.mode = mask_mode_from_string(j.value("mode", "lines1d"));
  if (j.contains("acs_fraction")) {
    m.acs_fraction = j.at("acs_fraction").get<double>();
    if (*m.acs_fraction <= 0.0 || *m.acs_fraction >= 1.0) {
      throw ConfigError("mask.acs_fraction must lie in (0,1)");
    }
  }
  m.file = j.value("file", m.file);
  if (m.strategy == MaskStrategy::FromFile && m.file.empty()) {
    throw ConfigError("mask.file is required for strategy from_file");
  }
  m.oracle = j.value("oracle", m.oracle);
  return m;
}

PhantomSpec parse_phantom(const json& j) {
  require_keys(j, {"height", "width", "seed", "lesions"}, "phantom");
  PhantomSpec p;
  p.height = j.value("height", p.height);
  p.width = j.value("width", p.width);
  p.seed = j.value("seed", p.seed);
  if (j.contains("lesions")) {
    for (const auto& l : j.at("lesions")) {
      require_keys(l, {"center", "radii", "delta", "label"}, "lesion");
      LesionSpec s;
      const auto& c = l.at("center");
      const auto& r = l.at("radii");
      if (!c.is_array() || c.size() != 2 || !r.is_array() || r.size() != 2) {
        throw ConfigError("lesion: center and radii must be [row, col] pairs");
      }
      s.center_row = c[0].get<double>();
      s.center_col = c[1].get<double>();
      s.radius_row = r[0].get<double>();
      s.radius_col = r[1].get<double>();
      s.intensity_delta = l.at("delta").get<double>();
      s.label = l.value("label", s.label);
      p.lesions.push_back(std::move(s));
    }
  }
  return p;
}

PhantomSuite parse_suite(const json& j) {
  require_keys(j, {"count", "height", "width", "lesions_per_subject", "seed"},
               "phantom_suite");
  PhantomSuite s;
  s.count = j.value("count", s.count);
  s.height = j.value("height", s.height);
  s.width = j.value("width", s.width);
  s.lesions_per_subject = j.value("lesions_per_subject", s.lesions_per_subject);
  s.seed = j.value("seed", s.seed);
  if (s.count < 1) throw ConfigError("phantom_suite.count must be >= 1");
  return s;
}

}  // namespace

std::string to_string(MaskStrategy s) {
  switch (s) {
    case MaskStrategy::NoLearn: return "no_learn";
    case MaskStrategy::Equispaced: return "equispaced";
    case MaskStrategy::GlobalLearn: return "global_learn";
    case MaskStrategy::AnomalyAware: return "anomaly_aware";
    case MaskStrategy::FromFile: return "from_file";
  }
  return "?";
}

MaskStrategy mask_strategy_from_string(const std::string& s) {
  if (s == "no_learn") return MaskStrategy::NoLearn;
  if (s == "equispaced") return MaskStrategy::Equispaced;
  if (s == "global_learn") return MaskStrategy::GlobalLearn;
  if (s == "anomaly_aware") return MaskStrategy::AnomalyAware;
  if (s == "from_file") return MaskStrategy::FromFile;
  throw ConfigError("unknown mask strategy '" + s + "'");
}

MaskObjectiveConfig ExperimentConfig::objective_config() const {
  MaskObjectiveConfig c;
  c.recon = objective_recon.value_or(recon);
  c.provider = provider;
  c.lambda = recon.lambda;
  c.workers = worker_count(workers);
  c.subjects_limit = objective_subjects_limit;
  return c;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  require_keys(j,
               {"seed", "coils", "phantoms", "phantom_dir", "phantom_suite",
                "mask", "recon", "provider", "optimizer", "objective", "noise",
                "outputs", "workers", "ablate", "grappa"},
               "config");

  ExperimentConfig cfg;
  cfg.seed = j.value("seed", cfg.seed);
  cfg.coils = j.value("coils", cfg.coils);
  if (cfg.coils < 1) throw ConfigError("config.coils must be >= 1");

  int sources = 0;
  if (j.contains("phantoms")) {
    for (const auto& p : j.at("phantoms")) cfg.phantoms.push_back(parse_phantom(p));
    if (cfg.phantoms.empty()) throw ConfigError("config.phantoms is empty");
    ++sources;
  }
  if (j.contains("phantom_dir")) {
    cfg.phantom_dir = j.at("phantom_dir").get<std::string>();
    ++sources;
  }
  if (j.contains("phantom_suite")) {
    cfg.phantom_suite = parse_suite(j.at("phantom_suite"));
    ++sources;
  }
  if (sources != 1) {
    throw ConfigError(
        "config: exactly one of phantoms / phantom_dir / phantom_suite is "
        "required");
  }

  if (j.contains("mask")) cfg.mask = parse_mask(j.at("mask"));
  if (j.contains("recon")) cfg.recon = parse_recon(j.at("recon"));
  if (j.contains("provider")) cfg.provider = parse_provider(j.at("provider"));
  if (j.contains("optimizer")) cfg.optimizer = parse_optimizer(j.at("optimizer"));

  if (j.contains("objective")) {
    const auto& o = j.at("objective");
    require_keys(o, {"recon", "subjects_limit"}, "objective");
    if (o.contains("recon")) cfg.objective_recon = parse_recon(o.at("recon"));
    cfg.objective_subjects_limit = o.value("subjects_limit", 0);
  }

  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    require_keys(n, {"sigma"}, "noise");
    cfg.noise_sigma = n.value("sigma", 0.0);
    if (cfg.noise_sigma < 0.0) throw ConfigError("noise.sigma must be >= 0");
  }

  cfg.outputs = j.value("outputs", cfg.outputs);
  cfg.workers = j.value("workers", cfg.workers);

  if (j.contains("ablate")) {
    const auto& a = j.at("ablate");
    require_keys(a, {"accelerations"}, "ablate");
    if (a.contains("accelerations")) {
      cfg.ablate_accelerations.clear();
      for (const auto& r : a.at("accelerations")) {
        cfg.ablate_accelerations.push_back(r.get<double>());
      }
      if (cfg.ablate_accelerations.empty()) {
        throw ConfigError("ablate.accelerations is empty");
      }
    }
  }

  if (j.contains("grappa")) {
    const auto& g = j.at("grappa");
    require_keys(g, {"tikhonov"}, "grappa");
    cfg.grappa_tikhonov = g.value("tikhonov", cfg.grappa_tikhonov);
  }

  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  return parse_config(read_text_file(path));
}

}  // namespace pamri
