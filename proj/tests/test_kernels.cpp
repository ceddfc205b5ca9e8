#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>

#include "doctest.h"
#include "shepvi/kernels.hpp"

using namespace shepvi;

namespace {

double wendland_direct(double t) {
  if (t >= 1.0) return 0.0;
  const double one_minus = 1.0 - t;
  const double p4 = one_minus * one_minus * one_minus * one_minus;
  return p4 * (4.0 * t + 1.0);
}

}  // namespace

TEST_CASE("wendland42 matches the closed form") {
  const double sigma = 2.5;
  const ShapeFunction phi(ShapeKind::wendland42, sigma);
  for (double r : {0.0, 0.01, 0.1, 0.2, 0.3999, 0.4, 0.5, 1.0, 7.3}) {
    CHECK(phi(r) == doctest::Approx(wendland_direct(sigma * r)).epsilon(1e-15));
  }
  CHECK(phi(0.0) == 1.0);
}

TEST_CASE("wendland42 vanishes exactly at the support boundary") {
  const ShapeFunction phi(ShapeKind::wendland42, 10.0);
  CHECK(phi.support_radius() == doctest::Approx(0.1));
  CHECK(phi(0.1) == 0.0);
  CHECK(phi(0.1000001) == 0.0);
  CHECK(phi(0.0999999) > 0.0);
  CHECK(phi.assembly_radius() == phi.support_radius());
}

TEST_CASE("wendland42 is nonincreasing on [0, support]") {
  const ShapeFunction phi(ShapeKind::wendland42, 1.0);
  double prev = phi(0.0);
  for (int i = 1; i <= 1000; ++i) {
    const double cur = phi(i / 1000.0);
    CHECK(cur <= prev);
    prev = cur;
  }
}

TEST_CASE("gaussian has global support and a floored assembly radius") {
  const double sigma = 3.0;
  const ShapeFunction phi(ShapeKind::gaussian, sigma);
  CHECK(phi.support_radius() == std::numeric_limits<double>::infinity());
  for (double r : {0.0, 0.3, 1.0, 2.0}) {
    CHECK(phi(r) == doctest::Approx(std::exp(-(sigma * r) * (sigma * r)))
                        .epsilon(1e-15));
  }
  const double ra = phi.assembly_radius();
  CHECK(std::isfinite(ra));
  CHECK(phi(ra * 1.0000001) < ShapeFunction::weight_floor);
  CHECK(phi(ra * 0.99) >= ShapeFunction::weight_floor);
}

TEST_CASE("normalized support is the unscaled cutoff") {
  CHECK(ShapeFunction::normalized_support(ShapeKind::wendland42) == 1.0);
  CHECK(ShapeFunction::normalized_support(ShapeKind::gaussian) ==
        std::numeric_limits<double>::infinity());
}

TEST_CASE("stationary scaling ties sigma to the fill distance") {
  CHECK(sigma_from_fill(0.1, 0.025) == doctest::Approx(4.0));
  CHECK(sigma_from_fill(2.0, 0.5) == doctest::Approx(4.0));
}

TEST_CASE("nonpositive shape parameters are rejected") {
  CHECK_THROWS(ShapeFunction(ShapeKind::wendland42, 0.0));
  CHECK_THROWS(ShapeFunction(ShapeKind::gaussian, -1.0));
}
