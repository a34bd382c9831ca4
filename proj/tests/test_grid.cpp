#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "bornopp/grid.hpp"

using namespace bornopp;
using Catch::Approx;

namespace {
CVector random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  CVector v(n);
  for (auto& x : v) x = Complex(d(rng), d(rng));
  return v;
}
}  // namespace

TEST_CASE("make_grid spacing and lattice", "[grid]") {
  Grid1D g = make_grid(-8, 8, 256);
  CHECK(g.spacing() == 0.0625);
  CHECK(g.size() == 256);

  Grid1D h = make_grid(0, 2 * pi, 8);
  const double expected[] = {0, 1, 2, 3, -4, -3, -2, -1};
  for (int j = 0; j < 8; ++j) CHECK(h.momenta()[j] == Approx(expected[j]).margin(1e-14));
}

TEST_CASE("make_grid rejects bad input", "[grid]") {
  CHECK_THROWS_AS(make_grid(-8, 8, 100), precondition_error);
  CHECK_THROWS_AS(make_grid(-8, 8, 4), precondition_error);
  CHECK_THROWS_AS(make_grid(1, 1, 64), precondition_error);
  CHECK_THROWS_AS(make_grid(2, 1, 64), precondition_error);
}

TEST_CASE("norm basics", "[grid]") {
  Grid1D g = make_grid(0, 2 * pi, 64);
  CHECK(norm(NuclearWave(g, 0.1, CVector::Zero(64))) == 0.0);
  CHECK(norm(NuclearWave(g, 0.1, CVector::Ones(64))) == Approx(std::sqrt(2 * pi)).epsilon(1e-14));
}

TEST_CASE("Plancherel holds for random waves", "[grid][property]") {
  std::mt19937_64 rng(7);
  for (std::size_t n : {8u, 64u, 512u}) {
    Grid1D g = make_grid(-3.0, 5.0, n);
    for (int trial = 0; trial < 10; ++trial) {
      NuclearWave w(g, 0.2, random_vector(g.ssize(), rng));
      CHECK(std::abs(norm(w) - momentum_norm(w)) <= 1e-12 * norm(w));
      MolecularWave mw(g, 3, 0.2, random_vector(3 * g.ssize(), rng));
      CHECK(std::abs(norm(mw) - momentum_norm(mw)) <= 1e-12 * norm(mw));
    }
  }
}

TEST_CASE("norms are invariant under a global phase", "[grid][property]") {
  std::mt19937_64 rng(11);
  Grid1D g = make_grid(-4, 4, 128);
  for (int trial = 0; trial < 10; ++trial) {
    MolecularWave w(g, 2, 0.1, random_vector(2 * g.ssize(), rng));
    MolecularWave r = w;
    r.values *= std::exp(imag_unit * (0.37 * trial));
    CHECK(norm(r) == Approx(norm(w)).epsilon(1e-14));
    CHECK(sobolev_norm(r, 1) == Approx(sobolev_norm(w, 1)).epsilon(1e-13));
    CHECK(sobolev_norm(r, 2) == Approx(sobolev_norm(w, 2)).epsilon(1e-13));
  }
}

TEST_CASE("sobolev norms", "[grid]") {
  Grid1D g = make_grid(0, 2 * pi, 64);
  NuclearWave c(g, 0.3, CVector::Constant(64, Complex(0.5, 0.2)));
  CHECK(sobolev_norm(c, 1) == Approx(norm(c)).epsilon(1e-13));
  CHECK(sobolev_norm(c, 2) == Approx(norm(c)).epsilon(1e-13));

  const double eps = 0.1, k0 = 3.0;
  CVector pw(64);
  for (Eigen::Index i = 0; i < 64; ++i) pw[i] = std::exp(imag_unit * k0 * g.points()[i]);
  NuclearWave w(g, eps, pw);
  CHECK(std::abs(sobolev_norm(w, 1) - (eps * k0 + 1) * norm(w)) <= 1e-10);
  CHECK(std::abs(sobolev_norm(w, 2) - (eps * eps * k0 * k0 + 1) * norm(w)) <= 1e-10);

  // order-2 norm decreases to the L2 norm as eps -> 0
  CVector gauss(64);
  for (Eigen::Index i = 0; i < 64; ++i) gauss[i] = std::exp(-2.0 * std::pow(g.points()[i] - pi, 2));
  double prev = infinity;
  for (double e : {0.1, 0.01}) {
    double s = sobolev_norm(NuclearWave(g, e, gauss), 2);
    CHECK(s < prev);
    CHECK(s >= norm(NuclearWave(g, e, gauss)));
    prev = s;
  }
  CHECK(prev == Approx(norm(NuclearWave(g, 0.01, gauss))).epsilon(1e-2));
}

TEST_CASE("spectral derivative matrix", "[grid]") {
  Grid1D g = make_grid(0, 2 * pi, 64);
  CMatrix d = spectral_derivative_matrix(g);
  CHECK(max_abs(CVector(d * CVector::Ones(64))) <= 1e-12);
  CHECK(hermiticity_defect(d) <= 1e-12);

  CVector e1(64);
  for (Eigen::Index i = 0; i < 64; ++i) e1[i] = std::exp(imag_unit * g.points()[i]);
  CHECK(max_abs(CVector(d * e1 - e1)) <= 1e-10);

  // every lattice mode, Nyquist included, is an eigenvector
  Grid1D h = make_grid(-2.0, 3.0, 32);
  CMatrix dh = spectral_derivative_matrix(h);
  for (Eigen::Index j = 0; j < 32; ++j) {
    CVector mode(32);
    for (Eigen::Index i = 0; i < 32; ++i) mode[i] = std::exp(imag_unit * h.momenta()[j] * h.points()[i]);
    CHECK(max_abs(CVector(dh * mode - h.momenta()[j] * mode)) <= 1e-10);
  }
}

TEST_CASE("wave containers validate lengths", "[grid]") {
  Grid1D g = make_grid(0, 1, 16);
  CHECK_THROWS_AS(NuclearWave(g, 0.1, CVector::Zero(15)), precondition_error);
  CHECK_THROWS_AS(MolecularWave(g, 2, 0.1, CVector::Zero(16)), precondition_error);
  MolecularWave w(g, 2, 0.1, CVector::Zero(32));
  w.set_component(1, CVector::Ones(16));
  CHECK(w.component(1).sum() == Complex(16, 0));
  CHECK(w.component(0).norm() == 0.0);
}
