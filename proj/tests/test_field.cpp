#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pamri/field.hpp"
#include "pamri/operators.hpp"
#include "pamri/rng.hpp"

using namespace pamri;

namespace {

ComplexImage random_image(Rng& rng, int h, int w) {
  ComplexImage img(h, w);
  for (std::size_t i = 0; i < img.size(); ++i) {
    img.data()[i] = cdouble{rng.gaussian(), rng.gaussian()};
  }
  return img;
}

double rel_diff(const ComplexImage& a, const ComplexImage& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a.data()[i] - b.data()[i]);
    den += std::norm(b.data()[i]);
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("shape invariants") {
  CHECK_THROWS_AS(ComplexImage(1, 4), ShapeError);
  CHECK_THROWS_AS(ComplexImage(4, 1), ShapeError);
  CHECK_NOTHROW(ComplexImage(2, 2));
}

TEST_CASE("unit impulse at the grid center transforms to a flat spectrum") {
  ComplexImage img(4, 4);
  img.at(2, 2) = cdouble{1.0, 0.0};
  const KSpacePlane k = fft2c(img);
  for (std::size_t i = 0; i < k.size(); ++i) {
    CHECK(k.data()[i].real() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(k.data()[i].imag() == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("flat spectrum inverts to the centered unit impulse") {
  KSpacePlane k(4, 4);
  for (std::size_t i = 0; i < k.size(); ++i) k.data()[i] = cdouble{0.25, 0.0};
  const ComplexImage img = ifft2c(k);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      const double expect = (r == 2 && c == 2) ? 1.0 : 0.0;
      CHECK(std::abs(img.at(r, c) - cdouble{expect, 0.0}) < 1e-12);
    }
  }
}

TEST_CASE("fft2c of a constant image is nonzero only at the center bin") {
  for (const auto [h, w] : {std::pair{4, 4}, {5, 5}, {6, 10}, {7, 4}}) {
    CAPTURE(h);
    CAPTURE(w);
    ComplexImage img(h, w);
    for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] = cdouble{1.0, 0.0};
    const KSpacePlane k = fft2c(img);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        if (r == h / 2 && c == w / 2) {
          CHECK(std::abs(k.at(r, c)) ==
                doctest::Approx(std::sqrt(double(h * w))).epsilon(1e-12));
        } else {
          CHECK(std::abs(k.at(r, c)) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("round trips are exact to 1e-12 relative, even and odd shapes") {
  Rng rng(3);
  for (const auto [h, w] : {std::pair{8, 8}, {5, 7}, {16, 6}, {9, 12}}) {
    const ComplexImage img = random_image(rng, h, w);
    CHECK(rel_diff(ifft2c(fft2c(img)), img) < 1e-12);
    CHECK(rel_diff(fft2c(ifft2c(img)), img) < 1e-12);
  }
}

TEST_CASE("unitarity: norms preserved to 1e-12 relative") {
  Rng rng(11);
  const ComplexImage img = random_image(rng, 8, 8);
  const double before = norm2(img);
  const double after = norm2(fft2c(img));
  CHECK(std::abs(after - before) / before < 1e-12);
}

TEST_CASE("adjointness: <F x, y> == <x, F^H y> for random 8x8 pairs") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexImage x = random_image(rng, 8, 8);
    const ComplexImage y = random_image(rng, 8, 8);
    const cdouble lhs = inner_product(fft2c(x), y);
    const cdouble rhs = inner_product(x, ifft2c(y));
    CHECK(std::abs(lhs - rhs) / std::abs(lhs) < 1e-12);
  }
}
