#pragma once

#include "bornopp/hamiltonians.hpp"

namespace bornopp {

enum class BTildeMethod { contour, spectral };

namespace detail {
struct FiberSplit {
  CMatrix h, dh, p, q;
  RVector values;
  CMatrix vectors;
  std::vector<char> selected;
};

inline FiberSplit fiber_split(const BandData& band, double x) {
  FiberSplit f;
  const int m = band.fiber_dim();
  f.h = band.model()(x);
  f.dh = band.model().derivative(x, band.options().fd_step);
  Eigensystem es = band.eigensystem_at(x);
  f.values = es.values;
  f.vectors = es.vectors;
  f.selected.assign(static_cast<std::size_t>(m), 0);
  for (int b : band.bands()) f.selected[static_cast<std::size_t>(b)] = 1;
  f.p = CMatrix::Zero(m, m);
  for (int b : band.bands()) f.p += es.vectors.col(b) * es.vectors.col(b).adjoint();
  f.q = CMatrix::Identity(m, m) - f.p;
  return f;
}
}  // namespace detail

// B~(X) = (1/2 pi i) \oint R^2 P^perp H_e' R P d lambda, which maps Ran P into
// Ran P^perp. The spectral form is
//   B~ = - sum_{k not in *, n in *} |k><k|H_e'|n><n| / (E_k - E_n)^2.
inline CMatrix btilde(const BandData& band, double x, BTildeMethod method = BTildeMethod::spectral,
                      int nodes = 128) {
  detail::FiberSplit f = detail::fiber_split(band, x);
  const int m = band.fiber_dim();
  if (method == BTildeMethod::spectral) {
    CMatrix b = CMatrix::Zero(m, m);
    for (int k = 0; k < m; ++k) {
      if (f.selected[static_cast<std::size_t>(k)]) continue;
      for (int n = 0; n < m; ++n) {
        if (!f.selected[static_cast<std::size_t>(n)]) continue;
        const double gap = f.values[k] - f.values[n];
        require(std::abs(gap) > 1e-12, "btilde: gap closed at X = " + std::to_string(x));
        const Complex c = (f.vectors.col(k).adjoint() * f.dh * f.vectors.col(n))(0, 0);
        b -= (c / (gap * gap)) * f.vectors.col(k) * f.vectors.col(n).adjoint();
      }
    }
    return b;
  }
  require(nodes >= 64, "btilde: need at least 64 contour nodes");
  ContourSpec contour = contour_around(band, nodes);
  const double c = contour.center(x), r = contour.radius(x);
  for (int a = 0; a < m; ++a) {
    const double dist = std::abs(std::abs(f.values[a] - c) - r);
    if (dist <= 1e-12) throw precondition_error("btilde: contour clearance violated at X = " + std::to_string(x));
  }
  const CMatrix id = CMatrix::Identity(m, m);
  CMatrix acc = CMatrix::Zero(m, m);
  for (int j = 0; j < nodes; ++j) {
    const Complex e = std::exp(imag_unit * (2.0 * pi * j / nodes));
    const CMatrix res = (f.h - (c + r * e) * id).inverse();
    acc += e * (res * res * f.q * f.dh * res * f.p);
  }
  return acc * (r / static_cast<double>(nodes));
}

// || [H_e, B~] - P^perp (grad P) P || at X. The identity holds with this
// sign: [H_e, R^2 X R] integrates to (1/2 pi i) \oint R P^perp H_e' R P.
inline double k2_residual(const BandData& band, double x, BTildeMethod method = BTildeMethod::spectral) {
  if (band.model().x_independent()) return 0.0;
  detail::FiberSplit f = detail::fiber_split(band, x);
  const CMatrix b = btilde(band, x, method);
  const CMatrix dp = grad_projection_at(band, x);
  const CMatrix lhs = f.h * b - b * f.h;
  return (lhs - f.q * dp * f.p).norm();
}

struct G1Residuals {
  double diagonal_block = 0.0;  // || P (grad P) P ||
  double reconstruction = 0.0;  // || grad P - (P^perp grad P P + adjoint) ||
};

inline G1Residuals g1_residuals(const BandData& band, double x) {
  detail::FiberSplit f = detail::fiber_split(band, x);
  const CMatrix dp = grad_projection_at(band, x);
  const CMatrix off = f.q * dp * f.p;
  return {(f.p * dp * f.p).norm(), (dp - off - off.adjoint()).norm()};
}

// (H - H_diag) psi = P H Q psi + Q H P psi without forming H_diag.
inline CVector offdiag_apply(const DenseHamiltonian& h, const ProjectionOperator& p, const CVector& psi) {
  CVector pp = p.apply(psi);
  CVector qp = psi - pp;
  CVector hq = h.matrix * qp;
  CVector hp = h.matrix * pp;
  return p.apply(hq) + (hp - p.apply(hp));
}

// Leading term of the off-diagonal part, T + T^* with
//   T = -eps Q P' (eps d/dX) P,   T^* = eps P (eps d/dX) P' Q.
inline CVector offdiag_leading_term(const BandData& band, const std::vector<CMatrix>& grad_p, double eps,
                                    const CVector& psi) {
  const Grid1D& g = band.grid();
  const int m = band.fiber_dim();
  const Eigen::Index n = g.ssize();
  auto fiberwise = [&](const CVector& v, auto&& op) {
    CVector out(v.size());
    for (Eigen::Index i = 0; i < n; ++i) out.segment(i * m, m) = op(i) * v.segment(i * m, m);
    return out;
  };
  auto P = [&](Eigen::Index i) { return band.projection(i); };
  auto Q = [&](Eigen::Index i) { return CMatrix(CMatrix::Identity(m, m) - band.projection(i)); };
  auto dP = [&](Eigen::Index i) { return grad_p[static_cast<std::size_t>(i)]; };
  auto eps_d = [&](const CVector& v) { return CVector(imag_unit * eps * spectral_derivative_fibered(v, g, m, 1)); };

  CVector t1 = fiberwise(eps_d(fiberwise(psi, P)), [&](Eigen::Index i) { return CMatrix(Q(i) * dP(i)); });
  CVector t2 = fiberwise(eps_d(fiberwise(psi, [&](Eigen::Index i) { return CMatrix(dP(i) * Q(i)); })), P);
  return -eps * t1 + eps * t2;
}

}  // namespace bornopp
