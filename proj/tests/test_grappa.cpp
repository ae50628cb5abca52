#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pamri/grappa.hpp"
#include "pamri/metrics.hpp"
#include "pamri/phantom.hpp"
#include "pamri/rng.hpp"

using namespace pamri;

namespace {

int wrap(int i, int n) {
  i %= n;
  return i < 0 ? i + n : i;
}

struct PlantedData {
  MultiCoilKSpace full;      // kernel-consistent full k-space
  GrappaKernel kernel;       // the generator
  SamplingMask mask;         // equispaced + ACS
};

/// Builds k-space where every off-lattice column is exactly the planted
/// kernel applied to its sampled 5x5 patch neighbours, so calibration and
/// reconstruction must reproduce the data to solver precision.
PlantedData make_planted(int h, int w, int nc, int R, double acs_fraction,
                         std::uint64_t seed) {
  PlantedData out;
  out.kernel.kernel_rows = 5;
  out.kernel.kernel_cols = 5;
  out.kernel.R = R;
  out.kernel.n_coils = nc;
  out.kernel.col_offsets.resize(R - 1);
  out.kernel.weights.resize(R - 1);

  Rng rng(seed);
  for (int d = 1; d < R; ++d) {
    std::vector<int> offsets;
    for (int dc = -2; dc <= 2; ++dc) {
      if (wrap(d + dc, R) == 0) offsets.push_back(dc);
    }
    out.kernel.col_offsets[d - 1] = offsets;
    const int n_unknowns = nc * static_cast<int>(offsets.size()) * 5;
    auto& w = out.kernel.weights[d - 1];
    w.resize(static_cast<std::size_t>(nc) * n_unknowns);
    for (auto& v : w) {
      v = cdouble{rng.gaussian(), rng.gaussian()} * 0.15;
    }
  }

  // random data on the lattice columns
  out.full.planes.assign(nc, KSpacePlane(h, w));
  for (int c = 0; c < nc; ++c) {
    for (int col = 0; col < w; col += R) {
      for (int r = 0; r < h; ++r) {
        out.full.planes[c].at(r, col) = cdouble{rng.gaussian(), rng.gaussian()};
      }
    }
  }
  // off-lattice columns from the kernel (circular indexing like the solver)
  for (int col = 0; col < w; ++col) {
    const int d = col % R;
    if (d == 0) continue;
    const auto& offsets = out.kernel.col_offsets[d - 1];
    const int n_unknowns = nc * static_cast<int>(offsets.size()) * 5;
    for (int r = 0; r < h; ++r) {
      std::vector<cdouble> sources;
      sources.reserve(n_unknowns);
      for (int sc = 0; sc < nc; ++sc) {
        for (int dc : offsets) {
          for (int dr = -2; dr <= 2; ++dr) {
            sources.push_back(
                out.full.planes[sc].at(wrap(r + dr, h), wrap(col + dc, w)));
          }
        }
      }
      for (int tc = 0; tc < nc; ++tc) {
        cdouble acc{0.0, 0.0};
        const cdouble* wrow = out.kernel.weights[d - 1].data() +
                              static_cast<std::size_t>(tc) * n_unknowns;
        for (int u = 0; u < n_unknowns; ++u) acc += wrow[u] * sources[u];
        out.full.planes[tc].at(r, col) = acc;
      }
    }
  }

  const SamplingMask acs =
      make_acs_mask(MaskMode::Lines1D, h, w, double(R), acs_fraction);
  out.mask = make_equispaced_mask(acs, R);
  return out;
}

MultiCoilKSpace undersample(const MultiCoilKSpace& full,
                            const SamplingMask& mask) {
  MultiCoilKSpace y = full;
  const auto weights = mask.effective_weights();
  for (auto& plane : y.planes) {
    for (std::size_t i = 0; i < plane.size(); ++i) {
      if (weights[i] == 0.0) plane.data()[i] = cdouble{0.0, 0.0};
    }
  }
  return y;
}

}  // namespace

TEST_CASE("calibration recovers a planted 2-coil kernel") {
  const PlantedData planted = make_planted(32, 32, 2, 2, 0.4, 3);
  const MultiCoilKSpace y = undersample(planted.full, planted.mask);
  const GrappaKernel fit =
      grappa_calibrate_from_mask(y, planted.mask, 2, 5, 5, /*tikhonov=*/0.0);

  REQUIRE(fit.weights.size() == planted.kernel.weights.size());
  double worst = 0.0;
  for (std::size_t d = 0; d < fit.weights.size(); ++d) {
    REQUIRE(fit.col_offsets[d] == planted.kernel.col_offsets[d]);
    REQUIRE(fit.weights[d].size() == planted.kernel.weights[d].size());
    for (std::size_t i = 0; i < fit.weights[d].size(); ++i) {
      worst = std::max(worst,
                       std::abs(fit.weights[d][i] - planted.kernel.weights[d][i]));
    }
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("single-coil calibration attains the least-squares optimum") {
  const PlantedData planted = make_planted(24, 24, 1, 2, 0.4, 7);
  const MultiCoilKSpace y = undersample(planted.full, planted.mask);
  const GrappaKernel fit =
      grappa_calibrate_from_mask(y, planted.mask, 2, 5, 5, 0.0);
  // consistent data: the least-squares optimum has zero residual, i.e. the
  // fit reproduces the in-coil generator exactly
  double worst = 0.0;
  for (std::size_t i = 0; i < fit.weights[0].size(); ++i) {
    worst = std::max(worst,
                     std::abs(fit.weights[0][i] - planted.kernel.weights[0][i]));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("a two-line ACS cannot support a 5x5 kernel") {
  const PlantedData planted = make_planted(32, 32, 2, 2, 0.4, 11);
  const MultiCoilKSpace y = undersample(planted.full, planted.mask);
  try {
    // acs fraction 2/32
    const SamplingMask acs = make_acs_mask(MaskMode::Lines1D, 32, 32, 2.0, 0.0625);
    const SamplingMask tight_mask = make_equispaced_mask(acs, 2);
    grappa_calibrate_from_mask(y, tight_mask, 2);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("equations") != std::string::npos);
    CHECK(msg.find("unknowns") != std::string::npos);
  }
}

TEST_CASE("reconstruction is exact on kernel-consistent data") {
  const PlantedData planted = make_planted(32, 32, 2, 2, 0.4, 13);
  const MultiCoilKSpace y = undersample(planted.full, planted.mask);
  const GrappaKernel fit =
      grappa_calibrate_from_mask(y, planted.mask, 2, 5, 5, 0.0);

  const ComplexImage recon = grappa_reconstruct(y, planted.mask, fit);
  const ComplexImage want = zero_filled_rss(planted.full);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < recon.size(); ++i) {
    num += std::norm(recon.data()[i] - want.data()[i]);
    den += std::norm(want.data()[i]);
  }
  CHECK(std::sqrt(num / den) < 1e-6);
}

TEST_CASE("measured entries are bit-identical after the fill") {
  const PlantedData planted = make_planted(32, 32, 2, 2, 0.4, 17);
  const MultiCoilKSpace y = undersample(planted.full, planted.mask);
  const GrappaKernel fit = grappa_calibrate_from_mask(y, planted.mask, 2);

  const MultiCoilKSpace filled = grappa_fill(y, planted.mask, fit);
  const auto weights = planted.mask.effective_weights();
  for (int c = 0; c < filled.n_coils(); ++c) {
    for (std::size_t i = 0; i < filled.planes[c].size(); ++i) {
      if (weights[i] > 0.0) {
        CHECK(filled.planes[c].data()[i] == y.planes[c].data()[i]);
      }
    }
  }
}

TEST_CASE("rss output magnitude is real and nonnegative") {
  const PlantedData planted = make_planted(32, 32, 2, 2, 0.4, 23);
  const MultiCoilKSpace y = undersample(planted.full, planted.mask);
  const GrappaKernel fit = grappa_calibrate_from_mask(y, planted.mask, 2);
  const ComplexImage img = grappa_reconstruct(y, planted.mask, fit);
  for (std::size_t i = 0; i < img.size(); ++i) {
    CHECK(img.data()[i].imag() == 0.0);
    CHECK(img.data()[i].real() >= 0.0);
  }
}

TEST_CASE("non-equispaced masks are rejected") {
  const PlantedData planted = make_planted(32, 32, 2, 2, 0.4, 19);
  const MultiCoilKSpace y = undersample(planted.full, planted.mask);
  const GrappaKernel fit = grappa_calibrate_from_mask(y, planted.mask, 2);

  const SamplingMask acs = make_acs_mask(MaskMode::Lines1D, 32, 32, 2.0, 0.4);
  const SamplingMask random = make_random_mask(
      acs, MaskBudget{2.0, 16, acs.acs_unit_count()}, 5);
  CHECK_THROWS_AS(grappa_reconstruct(y, random, fit), ConfigError);
}

TEST_CASE("R=1 passthrough equals the zero-filled combine exactly") {
  PhantomSpec spec;
  spec.height = 32;
  spec.width = 32;
  const auto [gt, boxes] = generate_phantom(spec);
  (void)boxes;
  const CoilSensitivities coils = generate_coil_maps(4, 32, 32);
  SamplingMask acs = make_acs_mask(MaskMode::Lines1D, 32, 32, 2.0, 0.4);
  const SamplingMask full = make_equispaced_mask(acs, 1);
  EncodingOperator op(full, coils);
  const MultiCoilKSpace y = op.forward(gt);

  GrappaKernel identity_kernel;  // never applied: nothing is missing
  identity_kernel.R = 2;
  identity_kernel.n_coils = 4;
  identity_kernel.col_offsets = {{-1, 1}};
  identity_kernel.weights = {std::vector<cdouble>(4 * 4 * 10, cdouble{0, 0})};

  const ComplexImage a = grappa_reconstruct(y, full, identity_kernel);
  const ComplexImage b = zero_filled_rss(y);
  CHECK(a == b);
}

TEST_CASE("grappa beats the zero-filled baseline on a phantom by >= 5 dB") {
  PhantomSpec spec;
  spec.height = 64;
  spec.width = 64;
  const auto [gt, boxes] = generate_phantom(spec);
  (void)boxes;
  const CoilSensitivities coils = generate_coil_maps(8, 64, 64);
  const SamplingMask acs = make_acs_mask(MaskMode::Lines1D, 64, 64, 2.0, 0.25);
  const SamplingMask mask = make_equispaced_mask(acs, 2);
  EncodingOperator op(mask, coils);
  const MultiCoilKSpace y = op.forward(gt);

  const GrappaKernel kernel = grappa_calibrate_from_mask(y, mask, 2);
  const ComplexImage grappa_img = grappa_reconstruct(y, mask, kernel);
  const ComplexImage zf_img = zero_filled_rss(y);

  const double gain = psnr(grappa_img, gt) - psnr(zf_img, gt);
  CHECK(gain >= 5.0);
}
