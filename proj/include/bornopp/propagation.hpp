#pragma once

#include <optional>

#include "bornopp/eigensolver.hpp"
#include "bornopp/hamiltonians.hpp"

namespace bornopp {

// One-time eigendecomposition H = V diag(lambda) V^*, giving exact
// exp(-i H t / eps) for any t.
struct SpectralPropagator {
  RVector eigenvalues;
  CMatrix eigenvectors;
  double epsilon = 1.0;
  HamiltonianKind source = HamiltonianKind::full;
  Grid1D grid;
  int fiber_dim = 1;

  Eigen::Index dimension() const { return eigenvalues.size(); }

  CVector evolve(const CVector& v, double t) const {
    require(v.size() == dimension(), "evolve: dimension mismatch");
    CVector c = eigenvectors.adjoint() * v;
    for (Eigen::Index j = 0; j < c.size(); ++j) c[j] *= std::exp(-imag_unit * eigenvalues[j] * (t / epsilon));
    return eigenvectors * c;
  }

  CMatrix reconstruct() const {
    return eigenvectors * eigenvalues.cast<Complex>().asDiagonal() * eigenvectors.adjoint();
  }
};

inline SpectralPropagator diagonalize(const DenseHamiltonian& h) {
  require(hermiticity_defect(h.matrix) <= 1e-10 * std::max(1.0, max_abs(h.matrix)),
          "diagonalize: matrix is not Hermitian");
  SpectralPropagator p;
  hermitian_eigen(h.matrix, p.eigenvalues, p.eigenvectors);
  p.epsilon = h.epsilon;
  p.source = h.kind;
  p.grid = h.grid;
  p.fiber_dim = h.fiber_dim;
  return p;
}

template <GridWave W>
W evolve(const SpectralPropagator& prop, const W& w, double t) {
  require(w.values.size() == prop.dimension(), "evolve: dimension mismatch");
  W out = w;
  out.values = prop.evolve(w.values, t);
  return out;
}

template <GridWave W>
double energy(const DenseHamiltonian& h, const W& w) {
  return (w.values.dot(h.matrix * w.values)).real() * w.grid.spacing();
}

// Projection onto eigenvalues <= cutoff of the propagator's Hamiltonian.
inline ProjectionOperator energy_cutoff(const SpectralPropagator& prop, double cutoff) {
  Eigen::Index count = 0;
  while (count < prop.dimension() && prop.eigenvalues[count] <= cutoff) ++count;
  const CMatrix& v = prop.eigenvectors;
  CMatrix p = v.leftCols(count) * v.leftCols(count).adjoint();
  return ProjectionOperator::dense(ProjectionKind::energy_cutoff, prop.fiber_dim, std::move(p));
}

// ||(e^{-iHt/eps} - e^{-iH_diag t/eps}) psi0|| / ||psi0||_{W^{2,eps}}
inline double theorem1_error(const SpectralPropagator& full, const SpectralPropagator& diag,
                             const MolecularWave& psi0, double t) {
  const double s = sobolev_norm(psi0, 2);
  require(s > 0.0, "theorem1_error: zero initial state");
  CVector d = full.evolve(psi0.values, t) - diag.evolve(psi0.values, t);
  return l2_norm(d, psi0.grid) / s;
}

// Applied-state version of the energy-cutoff bound:
// ||(e^{-iHt/eps} - e^{-iH_diag t/eps}) E(H) psi0|| / ||psi0||.
inline double theorem1_cutoff_error(const SpectralPropagator& full, const SpectralPropagator& diag,
                                    const ProjectionOperator& cutoff, const MolecularWave& psi0, double t) {
  const double s = norm(psi0);
  require(s > 0.0, "theorem1_cutoff_error: zero initial state");
  CVector v = cutoff.apply(psi0.values);
  CVector d = full.evolve(v, t) - diag.evolve(v, t);
  return l2_norm(d, psi0.grid) / s;
}

struct TimeWindow {
  double t_minus = -infinity;
  double t_plus = infinity;
};

// ||(e^{-iHt/eps} - U* e^{-iH_BO t/eps} U) psi_G|| / ||psi_G||, psi_G = P_Gamma psi0
// given already projected. Raises outside [T_-, T_+].
inline double theorem4_error(const SpectralPropagator& full, const SpectralPropagator& bo,
                             const BandData& band, const MolecularWave& projected, double t,
                             std::optional<TimeWindow> window = std::nullopt) {
  if (window && (t > window->t_plus || t < window->t_minus))
    throw precondition_error("theorem4_error: t = " + std::to_string(t) + " outside the hitting-time window [" +
                             std::to_string(window->t_minus) + ", " + std::to_string(window->t_plus) + "]");
  const double s = norm(projected);
  require(s > 0.0, "theorem4_error: projected state vanishes");
  CVector a = full.evolve(projected.values, t);
  NuclearWave phi = u_map(projected, band);
  phi.values = bo.evolve(phi.values, t);
  MolecularWave b = u_star_map(phi, band);
  return l2_norm(CVector(a - b.values), projected.grid) / s;
}

}  // namespace bornopp
