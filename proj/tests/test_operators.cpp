#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracle_utils.hpp"
#include "pamri/operators.hpp"
#include "pamri/phantom.hpp"
#include "pamri/rng.hpp"

using namespace pamri;

namespace {

SamplingMask full_mask(int h, int w) {
  SamplingMask m = make_acs_mask(MaskMode::Lines1D, h, w, 4.0);
  for (int u = 0; u < m.units(); ++u) {
    if (!m.unit_in_acs(u)) m.set_high_unit(u, true);
  }
  return m;
}

MultiCoilKSpace random_kspace(Rng& rng, int coils, int h, int w) {
  MultiCoilKSpace y;
  for (int c = 0; c < coils; ++c) y.planes.push_back(oracle::random_image(rng, h, w));
  return y;
}

}  // namespace

TEST_CASE("forward of zero is zero; empty mask maps everything to zero") {
  const CoilSensitivities coils = generate_coil_maps(2, 8, 8);

  EncodingOperator op(full_mask(8, 8), coils);
  const MultiCoilKSpace y = op.forward(ComplexImage(8, 8));
  for (const auto& plane : y.planes) {
    for (std::size_t i = 0; i < plane.size(); ++i) {
      CHECK(plane.data()[i] == cdouble{0.0, 0.0});
    }
  }

  SamplingMask empty = full_mask(8, 8);
  std::fill(empty.acs.begin(), empty.acs.end(), 0);
  std::fill(empty.high.begin(), empty.high.end(), 0);
  EncodingOperator op_empty(empty, coils);
  Rng rng(5);
  const MultiCoilKSpace ye = op_empty.forward(oracle::random_image(rng, 8, 8));
  for (const auto& plane : ye.planes) {
    for (std::size_t i = 0; i < plane.size(); ++i) {
      CHECK(plane.data()[i] == cdouble{0.0, 0.0});
    }
  }
}

TEST_CASE("full mask with a single flat coil reduces to fft2c") {
  CoilSensitivities coils = generate_coil_maps(1, 8, 8);
  // force the phase ramp away: S = 1 exactly
  for (std::size_t i = 0; i < coils.maps[0].size(); ++i) {
    coils.maps[0].data()[i] = cdouble{1.0, 0.0};
  }
  EncodingOperator op(full_mask(8, 8), coils);
  Rng rng(7);
  const ComplexImage x = oracle::random_image(rng, 8, 8);
  const MultiCoilKSpace y = op.forward(x);
  const KSpacePlane k = fft2c(x);
  CHECK(oracle::rel_error(y.planes[0], k) < 1e-14);
}

TEST_CASE("adjoint dot test over 100 random mask/coil/image draws") {
  Rng rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int coils = 1 + static_cast<int>(rng.below(4));
    const CoilSensitivities maps = generate_coil_maps(coils, 16, 16);
    const SamplingMask acs = make_acs_mask(MaskMode::Lines1D, 16, 16, 4.0);
    const SamplingMask mask =
        make_random_mask(acs, MaskBudget{4.0, 4, acs.acs_unit_count()},
                         rng.next_u64());
    EncodingOperator op(mask, maps);

    const ComplexImage x = oracle::random_image(rng, 16, 16);
    const MultiCoilKSpace y = random_kspace(rng, coils, 16, 16);

    cdouble lhs{0.0, 0.0};
    const MultiCoilKSpace ax = op.forward(x);
    for (int c = 0; c < coils; ++c) lhs += inner_product(ax.planes[c], y.planes[c]);
    const cdouble rhs = inner_product(x, op.adjoint(y));

    double den = 0.0;
    for (int c = 0; c < coils; ++c) den += std::pow(norm2(ax.planes[c]), 2);
    den = std::sqrt(den);
    double ny = 0.0;
    for (int c = 0; c < coils; ++c) ny += std::pow(norm2(y.planes[c]), 2);
    den *= std::sqrt(ny);
    if (den == 0.0) continue;
    worst = std::max(worst, std::abs(lhs - rhs) / den);
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("full mask and SOS coils make the normal operator the identity") {
  const CoilSensitivities coils = generate_coil_maps(4, 12, 12);
  EncodingOperator op(full_mask(12, 12), coils);
  Rng rng(13);
  const ComplexImage x = oracle::random_image(rng, 12, 12);
  const ComplexImage back = op.adjoint(op.forward(x));
  CHECK(oracle::rel_error(back, x) < 1e-10);
}

TEST_CASE("adjoint of zero k-space is the zero image") {
  const CoilSensitivities coils = generate_coil_maps(3, 8, 8);
  EncodingOperator op(full_mask(8, 8), coils);
  MultiCoilKSpace y;
  for (int c = 0; c < 3; ++c) y.planes.emplace_back(8, 8);
  const ComplexImage img = op.adjoint(y);
  for (std::size_t i = 0; i < img.size(); ++i) {
    CHECK(img.data()[i] == cdouble{0.0, 0.0});
  }
}

TEST_CASE("linearity of the forward operator") {
  const CoilSensitivities coils = generate_coil_maps(2, 8, 8);
  const SamplingMask acs = make_acs_mask(MaskMode::Lines1D, 8, 8, 4.0);
  const SamplingMask mask = make_random_mask(acs, MaskBudget{4.0, 2, 1}, 3);
  EncodingOperator op(mask, coils);

  Rng rng(17);
  const ComplexImage x = oracle::random_image(rng, 8, 8);
  const ComplexImage z = oracle::random_image(rng, 8, 8);
  const cdouble alpha{0.7, -1.3};

  ComplexImage combo(8, 8);
  for (std::size_t i = 0; i < combo.size(); ++i) {
    combo.data()[i] = alpha * x.data()[i] + z.data()[i];
  }
  const MultiCoilKSpace lhs = op.forward(combo);
  const MultiCoilKSpace fx = op.forward(x);
  const MultiCoilKSpace fz = op.forward(z);
  for (int c = 0; c < 2; ++c) {
    ComplexImage expect(8, 8);
    for (std::size_t i = 0; i < expect.size(); ++i) {
      expect.data()[i] = alpha * fx.planes[c].data()[i] + fz.planes[c].data()[i];
    }
    CHECK(oracle::rel_error(lhs.planes[c], expect) < 1e-12);
  }
}

TEST_CASE("shape mismatches are rejected") {
  const CoilSensitivities coils = generate_coil_maps(2, 8, 8);
  EncodingOperator op(full_mask(8, 8), coils);
  CHECK_THROWS_AS(op.forward(ComplexImage(8, 10)), ShapeError);
  Rng rng(1);
  MultiCoilKSpace bad;
  bad.planes.push_back(oracle::random_image(rng, 8, 8));
  CHECK_THROWS_AS(op.adjoint(bad), ShapeError);

  const CoilSensitivities wrong = generate_coil_maps(2, 8, 10);
  CHECK_THROWS_AS(EncodingOperator(full_mask(8, 8), wrong), ShapeError);
}

TEST_CASE("cg: identity operator converges in one iteration") {
  Rng rng(19);
  const ComplexImage rhs = oracle::random_image(rng, 4, 4);
  const CGResult res =
      cg_solve([](const ComplexImage& v) { return v; }, rhs, CGParams{});
  CHECK(res.converged);
  CHECK(res.iterations == 1);
  CHECK(oracle::rel_error(res.x, rhs) < 1e-12);
}

TEST_CASE("cg: diagonal system has the closed-form solution") {
  ComplexImage rhs(2, 2);
  rhs.at(0, 0) = 2.0;
  rhs.at(0, 1) = 10.0;
  rhs.at(1, 0) = 8.0;
  rhs.at(1, 1) = 24.0;
  const double diag[] = {2.0, 5.0, 4.0, 8.0};
  auto apply = [&](const ComplexImage& v) {
    ComplexImage out(2, 2);
    for (std::size_t i = 0; i < 4; ++i) out.data()[i] = diag[i] * v.data()[i];
    return out;
  };
  const CGResult res = cg_solve(apply, rhs, CGParams{1e-12, 50});
  CHECK(res.converged);
  CHECK(std::abs(res.x.at(0, 0) - cdouble{1.0, 0.0}) < 1e-10);
  CHECK(std::abs(res.x.at(0, 1) - cdouble{2.0, 0.0}) < 1e-10);
  CHECK(std::abs(res.x.at(1, 0) - cdouble{2.0, 0.0}) < 1e-10);
  CHECK(std::abs(res.x.at(1, 1) - cdouble{3.0, 0.0}) < 1e-10);
}

TEST_CASE("cg: zero rhs returns the zero image without iterating") {
  const CGResult res =
      cg_solve([](const ComplexImage& v) { return v; }, ComplexImage(4, 4),
               CGParams{});
  CHECK(res.converged);
  CHECK(res.iterations == 0);
  CHECK(norm2(res.x) == 0.0);
}

TEST_CASE("cg: NaN in the operator raises a numerical failure") {
  Rng rng(23);
  const ComplexImage rhs = oracle::random_image(rng, 4, 4);
  auto bad = [](const ComplexImage& v) {
    ComplexImage out = v;
    out.data()[0] = cdouble{std::nan(""), 0.0};
    return out;
  };
  CHECK_THROWS_AS(cg_solve(bad, rhs, CGParams{}), NumericalError);
}

TEST_CASE("cg matches the dense oracle on a 16x16 single-coil R=2 system") {
  const CoilSensitivities coils = generate_coil_maps(1, 16, 16);
  const SamplingMask acs = make_acs_mask(MaskMode::Lines1D, 16, 16, 2.0);
  const SamplingMask mask = make_equispaced_mask(acs, 2);
  EncodingOperator op(mask, coils);
  const double mu1 = 0.05;

  Rng rng(29);
  const ComplexImage gt = oracle::random_image(rng, 16, 16);
  ComplexImage rhs = op.adjoint(op.forward(gt));
  // a generic right-hand side, not in any special subspace
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs.data()[i] += 0.05 * gt.data()[i];

  auto normal = [&](const ComplexImage& v) {
    ComplexImage out = op.normal(v);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += mu1 * v.data()[i];
    return out;
  };
  const CGResult cg = cg_solve(normal, rhs, CGParams{1e-10, 400});
  const ComplexImage direct = oracle::dense_normal_solve(op, mu1, rhs);
  CHECK(oracle::rel_error(cg.x, direct) < 1e-6);
}

TEST_CASE("cg residual is monotone nonincreasing on the standard system") {
  // Track residuals by re-running with increasing iteration caps.
  const CoilSensitivities coils = generate_coil_maps(2, 16, 16);
  const SamplingMask acs = make_acs_mask(MaskMode::Lines1D, 16, 16, 4.0);
  const SamplingMask mask = make_random_mask(acs, MaskBudget{4.0, 4, 1}, 31);
  EncodingOperator op(mask, coils);

  Rng rng(31);
  const ComplexImage rhs = op.adjoint(op.forward(oracle::random_image(rng, 16, 16)));
  auto normal = [&](const ComplexImage& v) {
    ComplexImage out = op.normal(v);
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += 0.05 * v.data()[i];
    return out;
  };

  double prev = 1.0;
  for (int cap = 1; cap <= 25; ++cap) {
    const CGResult res = cg_solve(normal, rhs, CGParams{1e-14, cap});
    CHECK(res.relative_residual <= prev + 1e-8);
    prev = res.relative_residual;
  }
}
