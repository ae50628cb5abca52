#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracle_utils.hpp"
#include "pamri/maskopt.hpp"
#include "pamri/metrics.hpp"
#include "pamri/recon.hpp"

using namespace pamri;

namespace {

SamplingMask full_mask(int h, int w) {
  SamplingMask m = make_acs_mask(MaskMode::Lines1D, h, w, 4.0);
  for (int u = 0; u < m.units(); ++u) {
    if (!m.unit_in_acs(u)) m.set_high_unit(u, true);
  }
  return m;
}

ReconConfig tight_cfg() {
  ReconConfig cfg;
  cfg.cg = CGParams{1e-10, 200};
  cfg.denoiser.kind = DenoiserSpec::Kind::Identity;
  return cfg;
}

SubjectData lesion_subject(int h, int w, int coils) {
  PhantomSpec spec;
  spec.height = h;
  spec.width = w;
  spec.lesions.push_back({h * 0.45, w * 0.6, 3.0, 4.0, 0.3, "l"});
  SubjectData s;
  auto [gt, boxes] = generate_phantom(spec);
  s.gt = std::move(gt);
  s.boxes = std::move(boxes);
  s.coils = generate_coil_maps(coils, h, w);
  return s;
}

AttentionMap zero_map(int h, int w) {
  AttentionMap m;
  m.height = h;
  m.width = w;
  m.weights.assign(static_cast<std::size_t>(h) * w, 0.0);
  return m;
}

}  // namespace

TEST_CASE("dn_stage is a fixed point on fully sampled SOS data") {
  const SubjectData s = lesion_subject(16, 16, 4);
  EncodingOperator op(full_mask(16, 16), s.coils);
  const MultiCoilKSpace y = op.forward(s.gt);
  const ComplexImage out = dn_stage(s.gt, op, y, tight_cfg());
  CHECK(oracle::rel_error(out, s.gt) < 1e-8);
}

TEST_CASE("dn_stage with mu1=0 and a full mask is the plain adjoint") {
  const SubjectData s = lesion_subject(16, 16, 4);
  EncodingOperator op(full_mask(16, 16), s.coils);
  const MultiCoilKSpace y = op.forward(s.gt);

  ReconConfig cfg = tight_cfg();
  cfg.mu1 = 0.0;
  cfg.denoiser.kind = DenoiserSpec::Kind::GaussianBlur;  // must not matter
  cfg.denoiser.sigma = 2.0;

  Rng rng(3);
  const ComplexImage x_prev = oracle::random_image(rng, 16, 16);
  const ComplexImage out = dn_stage(x_prev, op, y, cfg);
  CHECK(oracle::rel_error(out, op.adjoint(y)) < 1e-8);
}

TEST_CASE("dn_stage matches the dense oracle on an undersampled system") {
  const CoilSensitivities coils = generate_coil_maps(1, 16, 16);
  const SamplingMask acs = make_acs_mask(MaskMode::Lines1D, 16, 16, 2.0);
  const SamplingMask mask = make_equispaced_mask(acs, 2);
  EncodingOperator op(mask, coils);

  Rng rng(5);
  const ComplexImage gt = oracle::random_image(rng, 16, 16);
  const ComplexImage x_prev = oracle::random_image(rng, 16, 16);
  const MultiCoilKSpace y = op.forward(gt);

  ReconConfig cfg = tight_cfg();
  cfg.mu1 = 0.05;
  const ComplexImage out = dn_stage(x_prev, op, y, cfg);

  // rhs = A^H y + mu1 * x_prev (identity denoiser)
  ComplexImage rhs = op.adjoint(y);
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    rhs.data()[i] += cfg.mu1 * x_prev.data()[i];
  }
  const ComplexImage direct = oracle::dense_normal_solve(op, cfg.mu1, rhs);
  CHECK(oracle::rel_error(out, direct) < 1e-6);
}

TEST_CASE("pa_stage with a closed gate keeps the exact fixed point") {
  const SubjectData s = lesion_subject(16, 16, 4);
  EncodingOperator op(full_mask(16, 16), s.coils);
  const MultiCoilKSpace y = op.forward(s.gt);
  const ComplexImage out =
      pa_stage(s.gt, zero_map(16, 16), op, y, tight_cfg());
  CHECK(oracle::rel_error(out, s.gt) < 1e-6);
}

TEST_CASE("pa_stage with mu2=0 matches the dense ADMM recursion") {
  const CoilSensitivities coils = generate_coil_maps(2, 8, 8);
  const SamplingMask acs = make_acs_mask(MaskMode::Lines1D, 8, 8, 4.0);
  const SamplingMask mask = make_random_mask(acs, MaskBudget{4.0, 3, 1}, 11);
  EncodingOperator op(mask, coils);

  Rng rng(7);
  const ComplexImage gt = oracle::random_image(rng, 8, 8);
  const ComplexImage x_global = oracle::random_image(rng, 8, 8);
  const MultiCoilKSpace y = op.forward(gt);

  ReconConfig cfg = tight_cfg();
  cfg.mu1 = 0.05;
  cfg.mu2 = 0.0;
  cfg.rho = 0.3;
  cfg.admm_iters = 3;

  const ComplexImage out = pa_stage(x_global, zero_map(8, 8), op, y, cfg);

  // Dense replay: with mu2=0 and dual(0)=0, Z == X and the dual stays zero,
  // so X^{n+1} = (A^H A + (mu1+rho) I)^{-1} (A^H y + (mu1+rho) X^n).
  const ComplexImage rhs_data = op.adjoint(y);
  ComplexImage xn = x_global;
  for (int n = 0; n < cfg.admm_iters; ++n) {
    ComplexImage rhs = rhs_data;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
      rhs.data()[i] += (cfg.mu1 + cfg.rho) * xn.data()[i];
    }
    xn = oracle::dense_normal_solve(op, cfg.mu1 + cfg.rho, rhs);
  }
  CHECK(oracle::rel_error(out, xn) < 1e-6);
}

TEST_CASE("pa_stage with a huge rho returns its input") {
  const SubjectData s = lesion_subject(16, 16, 2);
  const SamplingMask acs = make_acs_mask(MaskMode::Lines1D, 16, 16, 4.0);
  const SamplingMask mask = make_random_mask(acs, MaskBudget{4.0, 4, 1}, 13);
  EncodingOperator op(mask, s.coils);
  const MultiCoilKSpace y = op.forward(s.gt);

  ReconConfig cfg = tight_cfg();
  cfg.rho = 1e6;
  cfg.admm_iters = 1;

  Rng rng(17);
  const ComplexImage x_global = oracle::random_image(rng, 16, 16);
  const ComplexImage out = pa_stage(x_global, zero_map(16, 16), op, y, cfg);
  CHECK(oracle::rel_error(out, x_global) < 1e-3);
}

TEST_CASE("invalid rho/mu2 combinations are rejected") {
  ReconConfig cfg;
  cfg.mu2 = 0.1;
  cfg.rho = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("reconstruct is exact end to end on fully sampled data") {
  const SubjectData s = lesion_subject(24, 24, 4);
  EncodingOperator op(full_mask(24, 24), s.coils);
  const MultiCoilKSpace y = op.forward(s.gt);

  for (const int K : {1, 3}) {
    ReconConfig cfg = tight_cfg();
    cfg.stages = K;
    const ReconResult res = reconstruct(y, op, cfg, AttentionProviderSpec{}, {});
    CAPTURE(K);
    CHECK(oracle::rel_error(res.x_final, s.gt) < 10.0 * cfg.cg.tol);
    CHECK(psnr(res.x_final, s.gt) == kPsnrSentinelDb);
  }
}

TEST_CASE("zero provider and boxes provider with no boxes agree bitwise") {
  const SubjectData s = lesion_subject(16, 16, 2);
  const SamplingMask acs = make_acs_mask(MaskMode::Lines1D, 16, 16, 4.0);
  const SamplingMask mask = make_random_mask(acs, MaskBudget{4.0, 4, 1}, 19);
  EncodingOperator op(mask, s.coils);
  const MultiCoilKSpace y = op.forward(s.gt);

  ReconConfig cfg;
  cfg.cg = CGParams{1e-8, 60};

  AttentionProviderSpec zero;
  AttentionProviderSpec boxes;
  boxes.kind = AttentionProviderSpec::Kind::Boxes;
  boxes.feather_px = 2.0;

  const ReconResult a = reconstruct(y, op, cfg, zero, {});
  const ReconResult b = reconstruct(y, op, cfg, boxes, {});
  CHECK(a.x_final == b.x_final);
}

TEST_CASE("gate invariance: zero provider output ignores enhancer strength") {
  const SubjectData s = lesion_subject(16, 16, 2);
  const SamplingMask acs = make_acs_mask(MaskMode::Lines1D, 16, 16, 4.0);
  const SamplingMask mask = make_random_mask(acs, MaskBudget{4.0, 4, 1}, 23);
  EncodingOperator op(mask, s.coils);
  const MultiCoilKSpace y = op.forward(s.gt);

  ReconConfig cfg;
  cfg.cg = CGParams{1e-8, 60};

  ComplexImage reference;
  bool first = true;
  for (const double alpha : {0.0, 0.5, 2.0}) {
    cfg.enhancer.alpha = alpha;
    const ReconResult res = reconstruct(y, op, cfg, AttentionProviderSpec{}, {});
    if (first) {
      reference = res.x_final;
      first = false;
    } else {
      CHECK(res.x_final == reference);
    }
  }
}

TEST_CASE("reconstruction beats the zero-filled adjoint on a learned mask") {
  const SubjectData s = lesion_subject(64, 64, 4);
  const SamplingMask acs = make_acs_mask(MaskMode::Lines1D, 64, 64, 4.0);
  const MaskBudget budget = make_budget(MaskMode::Lines1D, 64, 64, 4.0);

  MaskObjectiveConfig obj;
  obj.recon.stages = 1;
  obj.recon.admm_iters = 1;
  obj.recon.cg = CGParams{1e-4, 12};
  obj.recon.denoiser.kind = DenoiserSpec::Kind::TvProx;
  obj.recon.denoiser.weight = 0.05;
  obj.recon.denoiser.inner_iters = 10;
  obj.workers = 2;

  const MaskOptResult learned =
      stage1_population({&s}, acs, budget, obj, OptimizerSpec{});
  EncodingOperator op(learned.mask, s.coils);
  const MultiCoilKSpace y = op.forward(s.gt);

  ReconConfig cfg;
  cfg.denoiser.kind = DenoiserSpec::Kind::TvProx;
  const ReconResult res = reconstruct(y, op, cfg, AttentionProviderSpec{}, {});

  const double recon_psnr = psnr(res.x_final, s.gt);
  const double adjoint_psnr = psnr(op.adjoint(y), s.gt);
  CHECK(recon_psnr > adjoint_psnr + 3.0);
}

TEST_CASE("data fidelity is monotone across stages") {
  const SubjectData s = lesion_subject(32, 32, 4);
  const SamplingMask acs = make_acs_mask(MaskMode::Lines1D, 32, 32, 4.0);
  const SamplingMask mask = make_random_mask(acs, MaskBudget{4.0, 8, 3}, 29);
  EncodingOperator op(mask, s.coils);
  const MultiCoilKSpace y = op.forward(s.gt);

  ReconConfig cfg;
  cfg.stages = 4;
  cfg.denoiser.kind = DenoiserSpec::Kind::TvProx;
  const ReconResult res = reconstruct(y, op, cfg, AttentionProviderSpec{}, {});
  REQUIRE(res.per_stage.size() == 4);
  for (std::size_t k = 1; k < res.per_stage.size(); ++k) {
    CHECK(res.per_stage[k].data_residual <=
          res.per_stage[k - 1].data_residual + 1e-8);
  }
}

TEST_CASE("recon_loss closed forms") {
  ComplexImage gt(2, 2);
  ComplexImage ones(2, 2);
  for (std::size_t i = 0; i < 4; ++i) ones.data()[i] = cdouble{1.0, 0.0};
  AttentionMap map;
  map.height = 2;
  map.width = 2;
  map.weights.assign(4, 1.0);

  CHECK(recon_loss(gt, gt, gt, map, {1.0, 1.0, 1.0}) == 0.0);
  CHECK(recon_loss(ones, ones, gt, map, {1.0, 1.0, 1.0}) ==
        doctest::Approx(12.0));

  AttentionMap zero = map;
  zero.weights.assign(4, 0.0);
  const double l1 = recon_loss(ones, ones, gt, zero, {1.0, 1.0, 10.0});
  const double l2 = recon_loss(ones, ones, gt, zero, {1.0, 1.0, 999.0});
  CHECK(l1 == l2);  // gamma3 is inert when the map vanishes
}

TEST_CASE("mask_loss closed forms and the Parseval identity") {
  Rng rng(31);
  const ComplexImage gt = oracle::random_image(rng, 16, 16);
  const ComplexImage x = oracle::random_image(rng, 16, 16);
  AttentionMap ones;
  ones.height = 16;
  ones.width = 16;
  ones.weights.assign(256, 1.0);

  SamplingMask full = full_mask(16, 16);
  CHECK(mask_loss(gt, gt, ones, full, 1.0) == 0.0);

  // lambda = 0 reduces to the squared error.
  double sq = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    sq += std::norm(x.data()[i] - gt.data()[i]);
  }
  CHECK(mask_loss(x, gt, ones, full, 0.0) == doctest::Approx(sq));

  // all-high mask + unit map: loss = (1 + lambda) ||x - gt||^2 by Parseval.
  SamplingMask all_high = full;
  std::fill(all_high.acs.begin(), all_high.acs.end(), 0);
  std::fill(all_high.high.begin(), all_high.high.end(), 1);
  const double loss = mask_loss(x, gt, ones, all_high, 2.0);
  CHECK(std::abs(loss - 3.0 * sq) / (3.0 * sq) < 1e-10);
}
