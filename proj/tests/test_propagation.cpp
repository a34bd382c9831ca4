#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "bornopp/propagation.hpp"

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

TEST_CASE("diagonalize a diagonal matrix", "[propagation]") {
  Grid1D g = make_grid(0, 1, 8);
  CMatrix m = CMatrix::Zero(8, 8);
  const double d[] = {3, -1, 2, 0.5, 7, -4, 1, 1.5};
  for (int i = 0; i < 8; ++i) m(i, i) = d[i];
  SpectralPropagator p = diagonalize(DenseHamiltonian{m, 0.1, HamiltonianKind::full, g, 1});
  std::vector<double> sorted(d, d + 8);
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 8; ++i) {
    CHECK(p.eigenvalues[i] == Approx(sorted[static_cast<std::size_t>(i)]).margin(1e-14));
    CHECK(p.eigenvectors.col(i).cwiseAbs().maxCoeff() == Approx(1.0).epsilon(1e-14));
  }
  CMatrix bad = m;
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(diagonalize(DenseHamiltonian{bad, 0.1, HamiltonianKind::full, g, 1}), precondition_error);
}

TEST_CASE("diagonalize the avoided crossing Hamiltonian", "[propagation]") {
  Grid1D g = make_grid(-6, 6, 256);
  DenseHamiltonian h = assemble_full(models::avoided_crossing(), g, 0.1);
  REQUIRE(h.dimension() == 512);
  SpectralPropagator p = diagonalize(h);
  CHECK((p.reconstruct() - h.matrix).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((p.eigenvectors.adjoint() * p.eigenvectors - CMatrix::Identity(512, 512)).cwiseAbs().maxCoeff() <= 1e-11);
  for (Eigen::Index j = 1; j < p.eigenvalues.size(); ++j) CHECK(p.eigenvalues[j] >= p.eigenvalues[j - 1]);
}

TEST_CASE("evolve", "[propagation]") {
  Grid1D g = make_grid(-6, 6, 64);
  DenseHamiltonian h = assemble_full(models::avoided_crossing(), g, 0.1);
  SpectralPropagator p = diagonalize(h);
  std::mt19937_64 rng(23);
  MolecularWave w(g, 2, 0.1, random_vector(128, rng));
  w.values /= norm(w);

  CHECK((evolve(p, w, 0.0).values - w.values).norm() <= 1e-12);

  const Eigen::Index k = 7;
  CVector vk = p.eigenvectors.col(k);
  CVector expect = std::exp(-imag_unit * (p.eigenvalues[k] * 0.8 / 0.1)) * vk;
  CHECK((p.evolve(vk, 0.8) - expect).norm() <= 1e-12);

  MolecularWave a = evolve(p, evolve(p, w, 0.7), 1.1);
  MolecularWave b = evolve(p, w, 1.8);
  CHECK((a.values - b.values).norm() <= 1e-10);

  const double e0 = energy(h, w);
  double drift = 0.0, edrift = 0.0;
  for (double t = 0.0; t <= 5.0; t += 0.5) {
    MolecularWave wt = evolve(p, w, t);
    drift = std::max(drift, std::abs(norm(wt) - 1.0));
    edrift = std::max(edrift, std::abs(energy(h, wt) - e0));
  }
  CHECK(drift <= 1e-11);
  CHECK(edrift <= 1e-10);
  CHECK_THROWS_AS(p.evolve(CVector::Zero(3), 1.0), precondition_error);
}

TEST_CASE("theorem1_error vanishes for commuting fixtures", "[propagation]") {
  Grid1D g = make_grid(-6, 6, 64);
  std::mt19937_64 rng(29);
  for (const ElectronicModel& m : {models::constant({0.0, 2.0, 5.0}), models::three_level(0.0)}) {
    BandOptions none;
    none.gauge = Gauge::none;
    BandData b = band_decompose(m, g, {0, 1}, none);
    DenseHamiltonian h = assemble_full(m, g, 0.1);
    SpectralPropagator full = diagonalize(h);
    SpectralPropagator diag = diagonalize(assemble_diag(h, full_projection(b)));
    MolecularWave w(g, 3, 0.1, random_vector(192, rng));
    CHECK(theorem1_error(full, diag, w, 1.0) <= 1e-10);
  }
}

TEST_CASE("theorem1_error for an eigenvector of both operators", "[propagation]") {
  Grid1D g = make_grid(-6, 6, 64);
  ElectronicModel ac = models::avoided_crossing();
  BandData b = band_decompose(ac, g, {0});
  DenseHamiltonian h = assemble_full(ac, g, 0.1);
  SpectralPropagator full = diagonalize(h);
  SpectralPropagator diag = diagonalize(assemble_diag(h, full_projection(b)));
  // an eigenvector of H_diag is generally not one of H: the error is bounded by 2
  MolecularWave w(g, 2, 0.1, diag.eigenvectors.col(0));
  const double e = theorem1_error(full, diag, w, 1.0);
  CHECK(e >= 0.0);
  CHECK(e <= 2.0);
  // trivially equal operators
  CHECK(theorem1_error(full, full, w, 3.0) <= 1e-12);
  MolecularWave zero(g, 2, 0.1, CVector::Zero(128));
  CHECK_THROWS_AS(theorem1_error(full, diag, zero, 1.0), precondition_error);
}

TEST_CASE("theorem4_error refuses times outside the window", "[propagation]") {
  Grid1D g = make_grid(-6, 6, 32);
  ElectronicModel ac = models::avoided_crossing();
  BandData b = band_decompose(ac, g, {0});
  SpectralPropagator full = diagonalize(assemble_full(ac, g, 0.2));
  SpectralPropagator bo = diagonalize(assemble_bo(b, 0.2));
  CVector phi(32);
  for (Eigen::Index i = 0; i < 32; ++i) phi[i] = std::exp(-g.points()[i] * g.points()[i]);
  MolecularWave psi = u_star_map(NuclearWave(g, 0.2, phi), b);
  CHECK_THROWS_AS(theorem4_error(full, bo, b, psi, 2.0, TimeWindow{-1.0, 1.0}), precondition_error);
  const double e = theorem4_error(full, bo, b, psi, 0.5, TimeWindow{-1.0, 1.0});
  CHECK(e >= 0.0);
  CHECK(e <= 2.0);
  CHECK(theorem4_error(full, bo, b, psi, 0.0) <= 1e-12);
}
