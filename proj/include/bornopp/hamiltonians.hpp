#pragma once

#include <array>
#include <functional>

#include "bornopp/bands.hpp"
#include "bornopp/indicators.hpp"

namespace bornopp {

using Field = std::function<double(double)>;

enum class HamiltonianKind { full, diag, diag_local, bo };

inline std::string to_string(HamiltonianKind k) {
  switch (k) {
    case HamiltonianKind::full: return "full";
    case HamiltonianKind::diag: return "diag";
    case HamiltonianKind::diag_local: return "diag_local";
    case HamiltonianKind::bo: return "bo";
  }
  return "full";
}

struct DenseHamiltonian {
  CMatrix matrix;
  double epsilon = 1.0;
  HamiltonianKind kind = HamiltonianKind::full;
  Grid1D grid;
  int fiber_dim = 1;

  Eigen::Index dimension() const { return matrix.rows(); }
};

namespace detail {

inline RVector sample(const Field& f, const Grid1D& g) {
  RVector v = RVector::Zero(g.ssize());
  if (!f) return v;
  for (Eigen::Index i = 0; i < g.ssize(); ++i) v[i] = f(g.points()[i]);
  return v;
}

// A periodic extension of A_ext must not jump at the box seam.
inline void check_seam(const Field& a, const Grid1D& g, double tol = 1e-6) {
  if (!a) return;
  const double left = a(g.x_min()), right = a(g.x_max());
  if (!(std::isfinite(left) && std::isfinite(right)) || std::abs(left - right) > tol)
    throw precondition_error("A_ext jumps across the periodic seam: A(x_min) = " + std::to_string(left) +
                             ", A(x_max) = " + std::to_string(right));
}

// 0.5 * (eps (D + diag A))^2 on the nuclear grid.
inline CMatrix kinetic(const Grid1D& g, double eps, const RVector& a) {
  CMatrix mmat = spectral_derivative_matrix(g);
  mmat.diagonal() += a.cast<Complex>();
  mmat *= eps;
  CMatrix k = 0.5 * (mmat * mmat);
  return 0.5 * (k + k.adjoint());
}

}  // namespace detail

// H = (eps^2/2)(-i d/dX + A_ext)^2 (x) 1 + blockdiag H_e(X_i), grid-major.
inline DenseHamiltonian assemble_full(const ElectronicModel& model, const Grid1D& grid, double eps,
                                      const Field& a_ext = nullptr) {
  require(eps > 0.0, "assemble_full: epsilon must be positive");
  detail::check_seam(a_ext, grid);
  const int m = model.fiber_dim();
  const Eigen::Index n = grid.ssize();
  CMatrix k = detail::kinetic(grid, eps, detail::sample(a_ext, grid));
  CMatrix h = CMatrix::Zero(n * m, n * m);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      for (int a = 0; a < m; ++a) h(i * m + a, j * m + a) = k(i, j);
  for (Eigen::Index i = 0; i < n; ++i) h.block(i * m, i * m, m, m) += model(grid.points()[i]);
  h = 0.5 * (h + h.adjoint());
  return {std::move(h), eps, HamiltonianKind::full, grid, m};
}

inline DenseHamiltonian assemble_full(const ElectronicModel& model, const BandData& band,
                                      const Grid1D& grid, double eps, const Field& a_ext = nullptr) {
  require(band.grid() == grid, "assemble_full: band data lives on a different grid");
  return assemble_full(model, grid, eps, a_ext);
}

enum class ProjectionKind { P_star, P0, P1, P2, P3, energy_cutoff, custom };

inline std::string to_string(ProjectionKind k) {
  switch (k) {
    case ProjectionKind::P_star: return "P_star";
    case ProjectionKind::P0: return "P_0";
    case ProjectionKind::P1: return "P_1";
    case ProjectionKind::P2: return "P_2";
    case ProjectionKind::P3: return "P_3";
    case ProjectionKind::energy_cutoff: return "energy_cutoff";
    case ProjectionKind::custom: return "custom";
  }
  return "custom";
}

// Operator on the molecular space, stored block-diagonally (one m x m block
// per grid point) when it acts fiberwise, densely otherwise.
class ProjectionOperator {
 public:
  ProjectionOperator() = default;

  static ProjectionOperator fiberwise(ProjectionKind kind, int m, std::vector<CMatrix> blocks) {
    ProjectionOperator p;
    p.kind_ = kind;
    p.m_ = m;
    p.blocks_ = std::move(blocks);
    p.block_ = true;
    return p;
  }

  static ProjectionOperator dense(ProjectionKind kind, int m, CMatrix mat) {
    ProjectionOperator p;
    p.kind_ = kind;
    p.m_ = m;
    p.dense_ = std::move(mat);
    p.block_ = false;
    return p;
  }

  ProjectionKind kind() const { return kind_; }
  int fiber_dim() const { return m_; }
  bool block_diagonal() const { return block_; }
  const std::vector<CMatrix>& blocks() const { return blocks_; }
  Eigen::Index dimension() const {
    return block_ ? static_cast<Eigen::Index>(blocks_.size()) * m_ : dense_.rows();
  }

  CMatrix matrix() const {
    if (!block_) return dense_;
    const Eigen::Index d = dimension();
    CMatrix out = CMatrix::Zero(d, d);
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const auto o = static_cast<Eigen::Index>(i) * m_;
      out.block(o, o, m_, m_) = blocks_[i];
    }
    return out;
  }

  CVector apply(const CVector& v) const {
    require(v.size() == dimension(), "projection: dimension mismatch");
    if (!block_) return dense_ * v;
    CVector out(v.size());
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const auto o = static_cast<Eigen::Index>(i) * m_;
      out.segment(o, m_) = blocks_[i] * v.segment(o, m_);
    }
    return out;
  }

  MolecularWave apply(const MolecularWave& w) const {
    return MolecularWave(w.grid, w.fiber_dim, w.epsilon, apply(w.values));
  }

  // Right multiplication H * P, block-aware.
  CMatrix right_multiply(const CMatrix& h) const {
    require(h.cols() == dimension(), "projection: dimension mismatch");
    if (!block_) return h * dense_;
    CMatrix out(h.rows(), h.cols());
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const auto o = static_cast<Eigen::Index>(i) * m_;
      out.middleCols(o, m_) = h.middleCols(o, m_) * blocks_[i];
    }
    return out;
  }

  // Left multiplication P * H, block-aware.
  CMatrix left_multiply(const CMatrix& h) const {
    require(h.rows() == dimension(), "projection: dimension mismatch");
    if (!block_) return dense_ * h;
    CMatrix out(h.rows(), h.cols());
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const auto o = static_cast<Eigen::Index>(i) * m_;
      out.middleRows(o, m_) = blocks_[i] * h.middleRows(o, m_);
    }
    return out;
  }

  double idempotency_defect() const {
    if (block_) {
      double d = 0.0;
      for (const auto& b : blocks_) d = std::max(d, max_abs(CMatrix(b * b - b)));
      return d;
    }
    return max_abs(CMatrix(dense_ * dense_ - dense_));
  }

  double hermiticity_defect() const {
    if (block_) {
      double d = 0.0;
      for (const auto& b : blocks_) d = std::max(d, bornopp::hermiticity_defect(b));
      return d;
    }
    return bornopp::hermiticity_defect(dense_);
  }

 private:
  ProjectionKind kind_ = ProjectionKind::custom;
  int m_ = 1;
  bool block_ = true;
  std::vector<CMatrix> blocks_;
  CMatrix dense_;
};

// P_* = direct integral over Lambda of P_*(X); zero blocks outside Lambda.
inline ProjectionOperator full_projection(const BandData& band) {
  const Eigen::Index n = band.grid().ssize();
  const int m = band.fiber_dim();
  std::vector<CMatrix> blocks(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    blocks[static_cast<std::size_t>(i)] = band.in_lambda(i) ? band.projection(i) : CMatrix::Zero(m, m);
  return ProjectionOperator::fiberwise(ProjectionKind::P_star, m, std::move(blocks));
}

// H_diag = P H P + P^perp H P^perp = H - HP - PH + 2 PHP.
inline DenseHamiltonian assemble_diag(const DenseHamiltonian& h, const ProjectionOperator& p) {
  require(h.dimension() == p.dimension(), "assemble_diag: dimension mismatch");
  require(p.idempotency_defect() <= 1e-8,
          "assemble_diag: P is not idempotent; use assemble_diag_local for smoothed projections");
  CMatrix hp = p.right_multiply(h.matrix);
  CMatrix php = p.left_multiply(hp);
  CMatrix d = h.matrix - hp - hp.adjoint() + 2.0 * php;
  d = 0.5 * (d + d.adjoint());
  return {std::move(d), h.epsilon, HamiltonianKind::diag, h.grid, h.fiber_dim};
}

// Locally isolated variant H_diag = P_3 H P_3.
inline DenseHamiltonian assemble_diag_local(const DenseHamiltonian& h, const ProjectionOperator& p3) {
  require(h.dimension() == p3.dimension(), "assemble_diag_local: dimension mismatch");
  CMatrix d = p3.left_multiply(p3.right_multiply(h.matrix));
  d = 0.5 * (d + d.adjoint());
  return {std::move(d), h.epsilon, HamiltonianKind::diag_local, h.grid, h.fiber_dim};
}

// Smooth extension of a band function beyond Lambda:
//   f_ext = c + s(X) (f - c),  s = indicator of Lambda with margin delta/5,
// c = mean of f at the two edges of Lambda - delta/5. f_ext equals f on
// Lambda - delta/5, is constant outside Lambda and C-infinity throughout.
inline RVector extend_band_function(const RVector& on_grid, const std::function<double(double)>& f,
                                    const Grid1D& grid, const Interval& lambda, double delta) {
  if (!std::isfinite(lambda.lo) && !std::isfinite(lambda.hi)) return on_grid;
  require(delta > 0.0, "extension: delta must be positive for a bounded Lambda");
  const double m = delta / 5.0;
  IntervalIndicator s(lambda, m);
  double c = 0.0;
  if (std::isfinite(lambda.lo) && std::isfinite(lambda.hi))
    c = 0.5 * (f(lambda.lo + m) + f(lambda.hi - m));
  else
    c = std::isfinite(lambda.lo) ? f(lambda.lo + m) : f(lambda.hi - m);
  RVector out(on_grid.size());
  for (Eigen::Index i = 0; i < on_grid.size(); ++i) {
    const double w = s(grid.points()[i]);
    out[i] = w == 1.0 ? on_grid[i] : c + w * (on_grid[i] - c);
  }
  return out;
}

struct BoOptions {
  bool include_geometric = true;
  double delta = 0.0;  // extension margin; required when Lambda is bounded
};

// H_BO = (1/2)(eps(-i d/dX + A_ext + A_geo))^2 + E, with E and A_geo
// extended smoothly outside Lambda.
inline DenseHamiltonian assemble_bo(const BandData& band, double eps, const Field& a_ext = nullptr,
                                    BoOptions opts = {}) {
  require(eps > 0.0, "assemble_bo: epsilon must be positive");
  if (!band.gauged()) throw precondition_error("assemble_bo: band has no gauge fixed");
  const Grid1D& g = band.grid();
  detail::check_seam(a_ext, g);
  RVector e = extend_band_function(band.band_energy(), [&band](double x) { return band.energy_at(x); }, g,
                                   band.lambda(), opts.delta);
  RVector a = detail::sample(a_ext, g);
  if (opts.include_geometric)
    a += extend_band_function(band.connection(), [&band](double x) { return band.connection_at(x); }, g,
                              band.lambda(), opts.delta);
  CMatrix h = detail::kinetic(g, eps, a);
  h.diagonal() += e.cast<Complex>();
  return {std::move(h), eps, HamiltonianKind::bo, g, 1};
}

// 1_i = indicator of Lambda - (4 - i) delta/5 with margin delta/5 and
// P_i = 1_i P_*, i = 0..3. P_i P_j = P_i for i < j.
inline std::array<ProjectionOperator, 4> smoothed_projection_family(const BandData& band, double delta) {
  const Interval& lambda = band.lambda();
  require(delta > 0.0, "smoothed_projection_family: delta must be positive");
  require(!lambda.shrink(delta).empty(), "smoothed_projection_family: delta too large, Lambda - delta is empty");
  ProjectionOperator pstar = full_projection(band);
  std::array<ProjectionOperator, 4> out;
  const ProjectionKind kinds[4] = {ProjectionKind::P0, ProjectionKind::P1, ProjectionKind::P2, ProjectionKind::P3};
  const Eigen::Index n = band.grid().ssize();
  for (int i = 0; i < 4; ++i) {
    IntervalIndicator ind(lambda.shrink((4 - i) * delta / 5.0), delta / 5.0);
    std::vector<CMatrix> blocks(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j)
      blocks[static_cast<std::size_t>(j)] = ind(band.grid().points()[j]) * pstar.blocks()[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = ProjectionOperator::fiberwise(kinds[i], band.fiber_dim(), std::move(blocks));
  }
  return out;
}

// (U psi)(X) = <chi(X), psi(X)> with chi extended over the whole grid.
// The U of the theory is u_map composed with P_*.
inline NuclearWave u_map(const MolecularWave& psi, const BandData& band) {
  if (!band.gauged()) throw precondition_error("u_map: band has no gauge fixed");
  require(psi.grid == band.grid() && psi.fiber_dim == band.fiber_dim(), "u_map: shape mismatch");
  const Eigen::Index n = psi.grid.ssize();
  const int m = psi.fiber_dim;
  CVector out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = band.chi(i).dot(psi.values.segment(i * m, m));
  return NuclearWave(psi.grid, psi.epsilon, std::move(out));
}

// (U* phi)(X) = phi(X) chi(X).
inline MolecularWave u_star_map(const NuclearWave& phi, const BandData& band) {
  if (!band.gauged()) throw precondition_error("u_star_map: band has no gauge fixed");
  require(phi.grid == band.grid(), "u_star_map: grid mismatch");
  const Eigen::Index n = phi.grid.ssize();
  const int m = band.fiber_dim();
  CVector out(n * m);
  for (Eigen::Index i = 0; i < n; ++i) out.segment(i * m, m) = phi.values[i] * band.chi(i);
  return MolecularWave(phi.grid, m, phi.epsilon, std::move(out));
}

}  // namespace bornopp
