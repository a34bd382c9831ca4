#include <catch2/catch_amalgamated.hpp>

#include "bornopp/fit.hpp"

using namespace bornopp;
using Catch::Approx;

TEST_CASE("exact power laws", "[fit]") {
  const std::vector<double> eps = {0.2, 0.1, 0.05, 0.025};
  std::vector<double> lin, cst, sq;
  for (double e : eps) {
    lin.push_back(3.0 * e);
    cst.push_back(0.7);
    sq.push_back(e * e);
  }
  SlopeFit f = fit_slope(eps, lin);
  CHECK(std::abs(f.slope - 1.0) <= 1e-10);
  CHECK(f.reported);
  CHECK_FALSE(f.dropped_largest);
  CHECK(f.residual <= 1e-12);
  CHECK(std::abs(fit_slope(eps, cst).slope) <= 1e-12);
  CHECK(fit_slope(eps, sq).slope == Approx(2.0).epsilon(1e-12));
  CHECK(std::exp(f.intercept) == Approx(3.0).epsilon(1e-12));
}

TEST_CASE("preasymptotic largest point is dropped once", "[fit]") {
  const std::vector<double> eps = {0.2, 0.1, 0.05, 0.025};
  const std::vector<double> err = {1.0, 0.1, 0.05, 0.025};
  SlopeFit f = fit_slope(eps, err);
  CHECK(f.dropped_largest);
  CHECK(f.points == 3);
  CHECK(f.slope == Approx(1.0).epsilon(1e-10));
  CHECK(f.reported);

  // not enough points to drop: the slope is withheld
  SlopeFit g = fit_slope({0.2, 0.1, 0.05}, {1.0, 0.1, 0.05});
  CHECK_FALSE(g.dropped_largest);
  CHECK_FALSE(g.reported);
}

TEST_CASE("noisy data is not reported", "[fit]") {
  SlopeFit f = fit_slope({0.2, 0.1, 0.05, 0.025}, {1.0, 0.01, 1.0, 0.01});
  CHECK_FALSE(f.reported);
  CHECK(fit_slope({0.2, 0.1, 0.05, 0.025}, {1.0, 0.01, 1.0, 0.01}, 10.0).reported);
}

TEST_CASE("degenerate inputs", "[fit]") {
  CHECK_FALSE(fit_slope({0.1}, {0.1}).reported);
  CHECK(std::isnan(fit_slope({}, {}).slope));
  SlopeFit z = fit_slope({0.2, 0.1, 0.05}, {0.0, 0.1, 0.05});
  CHECK(z.points == 2);
}
