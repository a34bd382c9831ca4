#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "bornopp/bands.hpp"

using namespace bornopp;
using Catch::Approx;

namespace {

// Lower eigenvector of [[f, g], [conj g, -f]] in closed form: (g, E - f).
CVector ac_lower(double x, int ref) {
  const double f = std::tanh(x);
  const Complex g(0.5, 0.2 / std::cosh(x));
  const double e = -std::sqrt(f * f + std::norm(g));
  CVector v(2);
  v << g, e - f;
  v /= v.norm();
  return v * (std::conj(v[ref]) / std::abs(v[ref]));
}

double ac_connection(double x, int ref) {
  const double h = 1e-3;
  CVector d = (-ac_lower(x + 2 * h, ref) + 8.0 * ac_lower(x + h, ref) - 8.0 * ac_lower(x - h, ref) +
               ac_lower(x - 2 * h, ref)) /
              (12 * h);
  return ac_lower(x, ref).dot(d).imag();
}

}  // namespace

TEST_CASE("eval_He on the avoided crossing model", "[electronic]") {
  ElectronicModel ac = models::avoided_crossing();
  CMatrix h0 = eval_He(ac, 0.0);
  CHECK(std::abs(h0(0, 0)) <= 1e-15);
  CHECK(std::abs(h0(0, 1) - Complex(0.5, 0.2)) <= 1e-15);
  CHECK(std::abs(h0(1, 0) - Complex(0.5, -0.2)) <= 1e-15);
  CHECK(std::abs(h0(1, 1)) <= 1e-15);

  Eigen::SelfAdjointEigenSolver<CMatrix> far(eval_He(ac, 40.0));
  CHECK(far.eigenvalues()[0] == Approx(-std::sqrt(1.25)).epsilon(1e-12));
  CHECK(far.eigenvalues()[1] == Approx(std::sqrt(1.25)).epsilon(1e-12));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  for (const auto& tag : models::available_tags()) {
    ElectronicModel m = models::from_tag(tag);
    for (int k = 0; k < 100; ++k) CHECK(hermiticity_defect(eval_He(m, u(rng))) <= 1e-13);
  }
  CHECK_THROWS_AS(eval_He(ac, std::nan("")), precondition_error);
}

TEST_CASE("analytic derivatives agree with finite differences", "[electronic]") {
  for (const auto& tag : models::available_tags()) {
    ElectronicModel m = models::from_tag(tag);
    for (double x : {-2.3, -0.7, 0.0, 0.4, 1.9}) {
      CMatrix fd = detail::central_difference6([&m](double s) { return CMatrix(m(s)); }, x, 1e-2);
      CHECK((m.derivative(x) - fd).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("model registry", "[electronic]") {
  CHECK(models::available_tags().size() == 5);
  CHECK_THROWS_AS(models::from_tag("nope"), precondition_error);
  ElectronicModel c = models::from_tag("constant", {{"e0", 1.0}, {"e1", 2.0}});
  CHECK(c.fiber_dim() == 2);
  CHECK(c.x_independent());
  ElectronicModel ac = models::from_tag("avoided_crossing", {{"a", 0.7}});
  CHECK(ac(0.0)(0, 1).real() == 0.7);
}

TEST_CASE("band_decompose invariants on the avoided crossing", "[electronic][bands]") {
  Grid1D g = make_grid(-6, 6, 256);
  ElectronicModel ac = models::avoided_crossing();
  BandData b = band_decompose(ac, g, {0});
  const Eigen::Index i0 = g.nearest_index(0.0);
  CHECK(g.points()[i0] == 0.0);
  CHECK(b.energies()(i0, 0) == Approx(-std::sqrt(0.29)).epsilon(1e-13));

  for (Eigen::Index i = 0; i < g.ssize(); ++i) {
    const CMatrix& p = b.projection(i);
    CHECK((p * p - p).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(hermiticity_defect(p) <= 1e-12);
    CHECK(std::abs(b.chi(i).norm() - 1.0) <= 1e-12);
    CHECK((ac(g.points()[i]) * b.chi(i) - b.energies()(i, 0) * b.chi(i)).norm() <= 1e-11);
  }
  // discrete overlaps of the continuum parallel-transport gauge
  const double dx = g.spacing();
  double worst_real = 0, worst_imag = 0;
  for (Eigen::Index i = 0; i + 1 < g.ssize(); ++i) {
    const Complex o = b.chi(i).dot(b.chi(i + 1));
    worst_real = std::max(worst_real, std::abs(o - 1.0) / (dx * dx));
    worst_imag = std::max(worst_imag, std::abs(o.imag()) / (dx * dx * dx));
    CHECK(o.real() > 0.0);
  }
  CHECK(worst_real <= 1.0);
  CHECK(worst_imag <= 1.0);

  // anchor convention
  const CVector& ca = b.chi(b.anchor());
  CHECK(b.anchor() == 0);
  CHECK(std::abs(ca[0].imag()) <= 1e-12);
  CHECK(ca[0].real() > 0.0);
}

TEST_CASE("constant model has constant chi and zero connection", "[electronic][bands]") {
  Grid1D g = make_grid(-4, 4, 64);
  BandData b = band_decompose(models::constant({1.0, 2.0}), g, {0});
  for (Eigen::Index i = 0; i < g.ssize(); ++i) {
    CHECK((b.chi(i) - b.chi(0)).norm() <= 1e-14);
    CHECK(b.connection()[i] == 0.0);
  }
  for (const auto& d : grad_projection(b)) CHECK(d.norm() == 0.0);
}

TEST_CASE("berry connection", "[electronic][bands]") {
  Grid1D g = make_grid(-6, 6, 128);
  BandOptions ref;
  ref.gauge = Gauge::reference_component;

  SECTION("real model in a real gauge has zero connection") {
    BandOptions o = ref;
    o.lambda = {-2, 2};
    BandData b = band_decompose(models::locally_isolated(), g, {0}, o);
    for (Eigen::Index i = 0; i < g.ssize(); ++i)
      if (b.in_lambda(i)) CHECK(std::abs(berry_connection(b)[i]) <= 1e-10);
  }

  SECTION("complex model: nonzero, matches the closed-form eigenvector") {
    BandData b = band_decompose(models::avoided_crossing(), g, {0}, ref);
    // sech' vanishes at X = 0, so A_geo(0) = 0 in this gauge; X = 0.75 is a grid point
    const Eigen::Index i1 = g.nearest_index(0.75);
    CHECK(g.points()[i1] == Approx(0.75).margin(1e-14));
    const double oracle = ac_connection(g.points()[i1], b.reference_component());
    CHECK(std::abs(oracle) > 1e-2);
    CHECK(std::abs(berry_connection(b)[i1] - oracle) <= 1e-8);
    CHECK(std::abs(berry_connection(b)[g.nearest_index(0.0)]) <= 1e-8);
    for (double x : {-1.3, 0.25, 2.0}) CHECK(std::abs(b.connection_at(x) - ac_connection(x, b.reference_component())) <= 1e-8);
  }

  SECTION("parallel transport gauge has zero connection") {
    BandData b = band_decompose(models::avoided_crossing(), g, {0});
    CHECK(berry_connection(b).cwiseAbs().maxCoeff() == 0.0);
    // and chi'(X) is orthogonal to chi(X)
    for (double x : {-1.0, 0.3, 2.2}) {
      CVector d = detail::central_difference6([&b](double s) { return CVector(b.chi_at(s)); }, x, 1e-2);
      CHECK(std::abs(b.chi_at(x).dot(d)) <= 1e-8);
    }
  }

  SECTION("gauge shift moves the connection by theta'") {
    for (Gauge gauge : {Gauge::reference_component, Gauge::parallel_transport}) {
      BandOptions o;
      o.gauge = gauge;
      BandData b = band_decompose(models::avoided_crossing(), g, {0}, o);
      BandData s = b.with_gauge_shift([](double x) { return 0.3 * std::sin(x); },
                                      [](double x) { return 0.3 * std::cos(x); });
      for (Eigen::Index i = 0; i < g.ssize(); ++i) {
        const double x = g.points()[i];
        CHECK(std::abs(berry_connection(s)[i] - berry_connection(b)[i] - 0.3 * std::cos(x)) <= 1e-8);
        CHECK((s.chi(i) - std::exp(imag_unit * (0.3 * std::sin(x))) * b.chi(i)).norm() <= 1e-12);
      }
      // the continuum connection of the shifted chi is theta' + A, checked by differentiation
      for (double x : {-0.8, 1.1}) {
        CVector d = detail::central_difference6([&s](double t) { return CVector(s.chi_at(t)); }, x, 1e-2);
        CHECK(std::abs(s.chi_at(x).dot(d).imag() - s.connection_at(x)) <= 1e-8);
      }
    }
  }

  SECTION("property: covariance for random polynomial phases") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    BandData b = band_decompose(models::avoided_crossing(), g, {0}, ref);
    for (int trial = 0; trial < 5; ++trial) {
      const double a1 = u(rng), a2 = u(rng), a3 = u(rng);
      BandData s = b.with_gauge_shift([=](double x) { return a1 * x + a2 * std::sin(x) + a3 * std::cos(2 * x); },
                                      [=](double x) { return a1 + a2 * std::cos(x) - 2 * a3 * std::sin(2 * x); });
      for (double x : {-2.0, 0.0, 1.5}) {
        const double expected = a1 + a2 * std::cos(x) - 2 * a3 * std::sin(2 * x);
        CHECK(std::abs(s.connection_at(x) - b.connection_at(x) - expected) <= 1e-8);
      }
    }
  }

  SECTION("no gauge is an error") {
    BandOptions o;
    o.gauge = Gauge::none;
    BandData b = band_decompose(models::avoided_crossing(), g, {0}, o);
    CHECK_THROWS_AS(berry_connection(b), precondition_error);
    CHECK_THROWS_AS(b.chi(0), precondition_error);
  }
}

TEST_CASE("band_decompose errors", "[electronic][bands]") {
  Grid1D g = make_grid(-4, 4, 64);
  BandOptions o;
  o.lambda = {-1, 1};
  CHECK_THROWS_AS(band_decompose(models::three_level(), g, {0}, o), precondition_error);
  o.lambda = {10, 11};
  CHECK_THROWS_AS(band_decompose(models::avoided_crossing(), g, {0}, o), precondition_error);
  CHECK_THROWS_AS(band_decompose(models::avoided_crossing(), g, {2}), precondition_error);
  CHECK_THROWS_AS(band_decompose(models::three_level(), g, {0, 1}), precondition_error);  // gauge needs one band
}

TEST_CASE("gap_check", "[electronic][bands]") {
  Grid1D g = make_grid(-6, 6, 256);
  BandOptions none;
  none.gauge = Gauge::none;

  GapReport ac = gap_check(band_decompose(models::avoided_crossing(), g, {0}, none), 0.5);
  CHECK(ac.holds);
  CHECK(ac.distance == Approx(2 * std::sqrt(0.29)).epsilon(1e-12));
  CHECK(ac.location == 0.0);
  CHECK(2 * std::sqrt(0.29) == Approx(1.0770).margin(1e-4));

  BandData x3 = band_decompose(models::three_level(), g, {0, 1}, none);
  GapReport pair = gap_check(x3, 0.5);
  CHECK(pair.holds);
  double closest = infinity;
  for (Eigen::Index i = 0; i < g.ssize(); ++i) {
    const double x = g.points()[i];
    closest = std::min(closest, 3.0 + 0.2 * x * x - std::abs(x));
  }
  CHECK(pair.distance == Approx(closest).epsilon(1e-10));
  // enclosing curves contain sigma_* and exclude the rest
  for (Eigen::Index i = 0; i < g.ssize(); ++i) {
    CHECK(pair.f_minus[i] + pair.margin <= x3.energies()(i, 0) + 1e-12);
    CHECK(pair.f_minus[i] + pair.margin <= x3.energies()(i, 1) + 1e-12);
    CHECK(pair.f_plus[i] - pair.margin >= std::max(x3.energies()(i, 0), x3.energies()(i, 1)) - 1e-12);
    CHECK(pair.f_plus[i] < x3.energies()(i, 2));
  }

  none.lambda = {-1, 1};
  CHECK_FALSE(gap_check(band_decompose(models::three_level(), g, {0}, none), 0.1).holds);

  // shrinking Lambda never decreases the achieved gap
  double prev = 0.0;
  for (double w : {5.5, 3.0, 1.0, 0.3}) {
    BandOptions o;
    o.gauge = Gauge::none;
    o.lambda = {-w, w};
    GapReport r = gap_check(band_decompose(models::locally_isolated(), g, {0}, o), 0.0);
    CHECK(r.distance >= prev);
    prev = r.distance;
  }
}

TEST_CASE("projection of a crossing pair is smooth", "[electronic][bands]") {
  Grid1D g = make_grid(-3, 3, 128);
  BandOptions none;
  none.gauge = Gauge::none;
  BandData pair = band_decompose(models::three_level(), g, {0, 1}, none);
  const Eigen::Index i0 = g.nearest_index(0.0);
  double step = 0;
  for (Eigen::Index i = i0 - 3; i < i0 + 3; ++i)
    step = std::max(step, (pair.projection(i + 1) - pair.projection(i)).norm());
  CHECK(step <= 2.0 * g.spacing());

  // the lowest eigenprojection by value jumps across X = 0
  auto lowest = [&](double x) {
    Eigensystem es = detail::sorted_eigensystem(models::three_level()(x));
    return CMatrix(es.vectors.col(0) * es.vectors.col(0).adjoint());
  };
  CHECK((lowest(g.points()[i0 + 1]) - lowest(g.points()[i0 - 1])).norm() > 0.5);
}

TEST_CASE("riesz projection", "[electronic][riesz]") {
  Grid1D g = make_grid(-6, 6, 128);
  ElectronicModel ac = models::avoided_crossing();
  BandData b = band_decompose(ac, g, {0});
  ContourSpec c = contour_around(b);
  const CVector chi = b.chi_at(0.0);
  CMatrix p = riesz_projection(ac, 0.0, c);
  CHECK((p - chi * chi.adjoint()).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((p * p - p).cwiseAbs().maxCoeff() <= 1e-10);

  for (double x : {-3.0, -0.5, 1.7})
    CHECK((riesz_projection(ac, x, c) - spectral_projection(ac(x), c.center(x), c.radius(x))).cwiseAbs().maxCoeff() <=
          1e-10);

  ContourSpec all{[](double) { return 0.0; }, [](double) { return 10.0; }, 128, 0.0};
  CHECK((riesz_projection(ac, 0.3, all) - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() <= 1e-10);
  ContourSpec none{[](double) { return 20.0; }, [](double) { return 1.0; }, 128, 0.0};
  CHECK(riesz_projection(ac, 0.3, none).cwiseAbs().maxCoeff() <= 1e-10);

  ContourSpec few = c;
  few.nodes = 32;
  CHECK_THROWS_AS(riesz_projection(ac, 0.0, few), precondition_error);
  const double e = -std::sqrt(0.29);
  ContourSpec touching{[e](double) { return e + 0.5; }, [](double) { return 0.5; }, 128, 0.1};
  CHECK_THROWS_AS(riesz_projection(ac, 0.0, touching), precondition_error);
}

TEST_CASE("grad_projection and the G1 decomposition", "[electronic][riesz]") {
  Grid1D g = make_grid(-6, 6, 128);
  BandData b = band_decompose(models::avoided_crossing(), g, {0});
  std::vector<CMatrix> dp = grad_projection(b);
  for (Eigen::Index i = 0; i < g.ssize(); i += 4) {
    const CMatrix& p = b.projection(i);
    const CMatrix q = CMatrix::Identity(2, 2) - p;
    const CMatrix& d = dp[static_cast<std::size_t>(i)];
    CHECK(hermiticity_defect(d) <= 1e-14);
    CHECK((p * d * p).norm() <= 1e-8);
    CHECK((d - q * d * p - (q * d * p).adjoint()).norm() <= 1e-8);
  }
}
