#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "bornopp/indicators.hpp"
#include "bornopp/propagation.hpp"

namespace bornopp {

// ---------------------------------------------------------------------------
// Symbols and Weyl quantization

enum class SymbolKind { generic, constant, position, momentum };

struct Symbol {
  std::function<double(double, double)> eval;
  std::string name = "generic";
  SymbolKind kind = SymbolKind::generic;

  double operator()(double q, double p) const { return eval(q, p); }
};

namespace symbols {
inline Symbol one() { return {[](double, double) { return 1.0; }, "1", SymbolKind::constant}; }
inline Symbol position() { return {[](double q, double) { return q; }, "q", SymbolKind::position}; }
inline Symbol momentum() { return {[](double, double p) { return p; }, "p", SymbolKind::momentum}; }
inline Symbol position_squared() { return {[](double q, double) { return q * q; }, "q^2"}; }
inline Symbol momentum_squared() { return {[](double, double p) { return p * p; }, "p^2"}; }
// p^2 exp(-p^2 / (2 w^2)): a bounded symbol with integrable Fourier transform in p.
inline Symbol windowed_momentum_squared(double width) {
  return {[width](double, double p) { return p * p * std::exp(-p * p / (2 * width * width)); },
          "p^2 gauss(" + std::to_string(width) + ")"};
}
inline Symbol indicator(const SmoothIndicator& ind) {
  return {[ind](double q, double p) { return ind(q, p); }, "indicator"};
}
}  // namespace symbols

// Weyl quantization on the periodic grid:
//   K(x_i, x_j) = (1/n) sum_k a((x_i + x_j)/2, eps k) e^{i k (x_i - x_j)}
// with the minimum-image offset s = i - j in [-n/2, n/2). The symbol is
// read as periodic in q over the box, so the midpoint lives on the
// half-spacing lattice mod the box (2n points). At the Nyquist offset the
// two midpoints half a box apart are averaged, which makes real symbols give
// Hermitian matrices. One inverse FFT per midpoint.
inline CMatrix weyl_quantize(const Symbol& a, const Grid1D& grid, double eps) {
  const Eigen::Index n = grid.ssize();
  const double dx = grid.spacing();
  std::vector<CVector> g(static_cast<std::size_t>(2 * n));
  CVector row(n);
  for (Eigen::Index mu = 0; mu < 2 * n; ++mu) {
    const double mid = grid.x_min() + 0.5 * static_cast<double>(mu) * dx;
    for (Eigen::Index j = 0; j < n; ++j) row[j] = a(mid, eps * grid.momenta()[j]);
    g[static_cast<std::size_t>(mu)] = ifft(row);
  }
  auto at = [&](Eigen::Index mu, Eigen::Index s) {
    return g[static_cast<std::size_t>(((mu % (2 * n)) + 2 * n) % (2 * n))][(s + n) % n];
  };
  CMatrix k(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index s = -n / 2; s < n / 2; ++s) {
      const Eigen::Index i = (j + s + n) % n;
      const Eigen::Index mu = 2 * j + s;
      k(i, j) = s == -n / 2 ? 0.5 * (at(mu, s) + at(mu + n, s)) : at(mu, s);
    }
  return k;
}

// Applies a nuclear operator to every fiber component of a molecular vector.
inline CVector apply_nuclear(const CMatrix& op, const CVector& v, int m) {
  const Eigen::Index n = op.rows();
  Eigen::Map<const CMatrix> fibers(v.data(), m, n);  // column i = psi(x_i)
  CMatrix out = fibers * op.transpose();
  return Eigen::Map<CVector>(out.data(), n * m);
}

// F2Norm-type integrability estimate  int dxi sup_q |xi| |a^(q, xi)|,
// a^ the Fourier transform in the momentum argument, by quadrature on
// [-P, P]; the window is doubled and a large change flags divergence.
struct F2Estimate {
  double value = 0.0;
  bool finite = true;
  std::string note;
};

inline F2Estimate f2_norm_estimate(const Symbol& a, const Grid1D& grid, double p_window = 16.0,
                                   int q_samples = 64, int p_samples = 1024) {
  if (a.kind == SymbolKind::constant || a.kind == SymbolKind::position)
    return {0.0, true, "independent of p: transform supported at xi = 0"};
  if (a.kind == SymbolKind::momentum)
    return {0.0, true, "linear in p: exempt, intertwining residual is exactly eps <chi, chi'>-type"};
  auto estimate = [&](double pw) {
    const int np = p_samples;
    const double dp = 2 * pw / np;
    RVector sup = RVector::Zero(np);
    CVector f(np);
    for (int iq = 0; iq < q_samples; ++iq) {
      const double q = grid.x_min() + grid.length() * (iq + 0.5) / q_samples;
      for (int j = 0; j < np; ++j) f[j] = a(q, -pw + j * dp);
      CVector h = fft(f);
      for (int j = 0; j < np; ++j) sup[j] = std::max(sup[j], std::abs(h[j]) * dp / std::sqrt(2 * pi));
    }
    const double dxi = 2 * pi / (np * dp);
    double s = 0.0;
    for (int j = 0; j < np; ++j) {
      const double xi = dxi * (j < np / 2 ? j : j - np);
      s += std::abs(xi) * sup[j] * dxi;
    }
    return s;
  };
  // same resolution in p, doubled window
  const double f1 = estimate(p_window);
  p_samples *= 2;
  const double f2 = estimate(2 * p_window);
  F2Estimate r;
  r.value = f2;
  r.finite = std::isfinite(f2) && std::abs(f2 - f1) <= 0.25 * std::max(f1, 1e-300) + 1e-12;
  r.note = r.finite ? "converged under window doubling" : "diverges under window doubling";
  return r;
}

// ---------------------------------------------------------------------------
// Classical side

struct PhasePoint {
  double q = 0.0;
  double p = 0.0;
};

struct ClassicalDensity {
  std::vector<double> q, p, w;

  ClassicalDensity() = default;
  ClassicalDensity(std::vector<double> qs, std::vector<double> ps, std::vector<double> ws)
      : q(std::move(qs)), p(std::move(ps)), w(std::move(ws)) {
    require(q.size() == p.size() && p.size() == w.size() && !w.empty(), "classical density: ragged cloud");
    double s = 0.0;
    for (double x : w) {
      require(x >= 0.0, "classical density: negative weight");
      s += x;
    }
    require(s > 0.0, "classical density: zero total weight");
    for (double& x : w) x /= s;
  }

  static ClassicalDensity point(double q0, double p0) { return ClassicalDensity({q0}, {p0}, {1.0}); }

  double expectation(const Symbol& a) const {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * a(q[i], p[i]);
    return s;
  }
};

// Band energy as a classical potential: value and gradient.
struct Potential {
  std::function<double(double)> value;
  std::function<double(double)> gradient;
};

namespace potentials {
inline Potential free() { return {[](double) { return 0.0; }, [](double) { return 0.0; }}; }
inline Potential harmonic(double omega = 1.0) {
  return {[omega](double q) { return 0.5 * omega * omega * q * q; }, [omega](double q) { return omega * omega * q; }};
}
inline Potential band(const BandData& b) {
  return {[b](double q) { return b.energy_at(q); }, [b](double q) { return b.energy_gradient_at(q); }};
}
}  // namespace potentials

struct FlowOptions {
  double dt = 1e-3;
  Interval window = Interval::whole();  // trajectory must stay inside
};

namespace detail {
inline PhasePoint verlet_step(const Potential& e, PhasePoint z, double h) {
  z.p -= 0.5 * h * e.gradient(z.q);
  z.q += h * z.p;
  z.p -= 0.5 * h * e.gradient(z.q);
  return z;
}
}  // namespace detail

// Stoermer-Verlet for qdot = p, pdot = -E'(q). Negative t runs backwards.
inline PhasePoint classical_flow(const Potential& e, PhasePoint z0, double t, FlowOptions opt = {}) {
  require(opt.dt > 0.0, "classical_flow: dt must be positive");
  if (t == 0.0) return z0;
  const auto steps = static_cast<long>(std::ceil(std::abs(t) / opt.dt - 1e-12));
  const double h = t / static_cast<double>(steps);
  PhasePoint z = z0;
  for (long s = 0; s < steps; ++s) {
    z = detail::verlet_step(e, z, h);
    if (!(z.q >= opt.window.lo && z.q <= opt.window.hi))
      throw precondition_error("classical_flow: trajectory left the window at q = " + std::to_string(z.q));
  }
  return z;
}

inline ClassicalDensity transport(const ClassicalDensity& rho, const Potential& e, double t, FlowOptions opt = {}) {
  ClassicalDensity out = rho;
  for (std::size_t i = 0; i < rho.w.size(); ++i) {
    PhasePoint z = classical_flow(e, {rho.q[i], rho.p[i]}, t, opt);
    out.q[i] = z.q;
    out.p[i] = z.p;
  }
  return out;
}

struct HittingOptions {
  double dt = 1e-3;
  double cloud_spacing = 0.05;  // lattice spacing, refined to alpha/4 when a region is given
  double horizon = 10.0;
};

struct HittingTimes {
  double t_minus = 0.0;
  double t_plus = 0.0;
  bool minus_capped = false;  // no exit before -horizon
  bool plus_capped = false;   // no exit before +horizon
  std::size_t cloud_size = 0;
};

// T_+ = sup{t >= 0 : (Phi^s(Gamma))_q inside Lambda - delta for s in [0, t]},
// T_- likewise backwards. Lattice cloud over the rectangles, per-point exit
// detection with bisection to dt/64; the cloud extremum is reported.
inline HittingTimes hitting_times(const std::vector<Rectangle>& gamma, const Interval& lambda, double delta,
                                  const Potential& e, HittingOptions opt = {}) {
  require(!gamma.empty(), "hitting_times: empty cloud");
  require(opt.dt > 0.0 && opt.cloud_spacing > 0.0 && opt.horizon > 0.0, "hitting_times: invalid options");
  const Interval inner = lambda.shrink(delta);
  std::vector<PhasePoint> cloud;
  for (const auto& r : gamma) {
    require(r.q2 >= r.q1 && r.p2 >= r.p1, "hitting_times: malformed rectangle");
    const int nq = r.q2 > r.q1 ? static_cast<int>(std::ceil((r.q2 - r.q1) / opt.cloud_spacing)) + 1 : 1;
    const int np = r.p2 > r.p1 ? static_cast<int>(std::ceil((r.p2 - r.p1) / opt.cloud_spacing)) + 1 : 1;
    for (int a = 0; a < nq; ++a)
      for (int b = 0; b < np; ++b) {
        const double q = nq == 1 ? r.q1 : r.q1 + (r.q2 - r.q1) * a / (nq - 1);
        const double p = np == 1 ? r.p1 : r.p1 + (r.p2 - r.p1) * b / (np - 1);
        cloud.push_back({q, p});
      }
  }
  require(!cloud.empty(), "hitting_times: empty cloud");
  for (const auto& z : cloud)
    if (!inner.contains(z.q))
      throw precondition_error("hitting_times: Gamma_q is not inside Lambda - delta (q = " + std::to_string(z.q) + ")");

  // |exit time|, or infinity when there is no exit before `limit`; only the
  // cloud minimum matters, so later points stop at the best time so far
  auto exit_time = [&](PhasePoint z, double sign, double limit) {
    const double h = sign * opt.dt;
    double t = 0.0;
    double force = e.gradient(z.q);  // reused across steps, same arithmetic as verlet_step
    while (t < limit) {
      PhasePoint next = z;
      next.p -= 0.5 * h * force;
      next.q += h * next.p;
      const double next_force = e.gradient(next.q);
      next.p -= 0.5 * h * next_force;
      if (!inner.contains(next.q)) {
        double lo = 0.0, hi = opt.dt;
        while (hi - lo > opt.dt / 64.0) {
          const double mid = 0.5 * (lo + hi);
          if (inner.contains(detail::verlet_step(e, z, sign * mid).q)) lo = mid;
          else hi = mid;
        }
        return t + 0.5 * (lo + hi);
      }
      z = next;
      force = next_force;
      t += opt.dt;
    }
    return infinity;
  };

  HittingTimes out;
  out.cloud_size = cloud.size();
  double tp = infinity, tm = infinity;
  for (const auto& z : cloud) {
    tp = std::min(tp, exit_time(z, +1.0, std::min(tp, opt.horizon)));
    tm = std::min(tm, exit_time(z, -1.0, std::min(tm, opt.horizon)));
  }
  out.plus_capped = !std::isfinite(tp);
  out.minus_capped = !std::isfinite(tm);
  out.t_plus = out.plus_capped ? opt.horizon : tp;
  out.t_minus = out.minus_capped ? -opt.horizon : -tm;
  return out;
}

inline HittingTimes hitting_times(const PhaseSpaceRegion& gamma, const Interval& lambda, double delta,
                                  const Potential& e, HittingOptions opt = {}) {
  opt.cloud_spacing = std::min(opt.cloud_spacing, gamma.alpha() / 4.0);
  return hitting_times(gamma.rectangles(), lambda, delta, e, opt);
}

// ---------------------------------------------------------------------------
// Wigner transform

// Marginal Wigner function on the (q, p) lattice q = x_i, p_j = j eps dk/2,
// j in [-n, n) (ascending). The state is spectrally interpolated to the
// half-spacing grid h = dx/2 and
//   W(x_i, p) = (1/2pi)(2h/eps) sum_s e^{2 i s h p/eps} <psi(x_i + s h), psi(x_i - s h)>
// summed over fiber components. Sum W dq dp = ||psi||^2 and the p-marginal
// is |psi(x_i)|^2.
struct WignerMarginal {
  RMatrix values;  // n x 2n
  RVector q;
  RVector p;
  double dq = 0.0;
  double dp = 0.0;

  double total() const { return values.sum() * dq * dp; }
};

inline WignerMarginal wigner_marginal(const CVector& values, const Grid1D& grid, int m, double eps) {
  const Eigen::Index n = grid.ssize();
  require(values.size() == n * m, "wigner_marginal: dimension mismatch");
  const Eigen::Index n2 = 2 * n;
  std::vector<CVector> fine(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) {
    CVector f = fft(detail::strided_component(values, n, m, a));
    CVector g = CVector::Zero(n2);
    for (Eigen::Index j = 0; j < n / 2; ++j) g[j] = f[j];
    for (Eigen::Index j = n / 2 + 1; j < n; ++j) g[j + n] = f[j];
    g[n / 2] = 0.5 * f[n / 2];
    g[n2 - n / 2] = 0.5 * f[n / 2];
    fine[static_cast<std::size_t>(a)] = 2.0 * ifft(g);
  }
  const double h = 0.5 * grid.spacing();
  const double pref = (1.0 / (2 * pi)) * (2 * h / eps) * static_cast<double>(n2);
  WignerMarginal w;
  w.values.resize(n, n2);
  w.q = grid.points();
  w.dq = grid.spacing();
  w.dp = 0.5 * eps * grid.dk();
  w.p.resize(n2);
  for (Eigen::Index j = 0; j < n2; ++j) w.p[j] = static_cast<double>(j - n) * w.dp;
  CVector corr(n2);
  for (Eigen::Index i = 0; i < n; ++i) {
    corr.setZero();
    for (int a = 0; a < m; ++a) {
      const CVector& f = fine[static_cast<std::size_t>(a)];
      for (Eigen::Index s = 0; s < n2; ++s)
        corr[s] += std::conj(f[(2 * i + s) % n2]) * f[((2 * i - s) % n2 + n2) % n2];
    }
    CVector spec = ifft(corr);
    for (Eigen::Index j = 0; j < n2; ++j) {
      const Eigen::Index lattice = j - n;  // ascending p index
      w.values(i, j) = pref * spec[(lattice + n2) % n2].real();
    }
  }
  return w;
}

template <GridWave W>
WignerMarginal wigner_marginal(const W& w) {
  return wigner_marginal(w.values, w.grid, w.fiber_dim, w.epsilon);
}

// ---------------------------------------------------------------------------
// Approximate projection and the semiclassical residuals

// P_Gamma^alpha = U* 1_(Lambda,delta) 1_(Gamma,alpha)^W U P_*.
class ApproxProjection {
 public:
  ApproxProjection(const BandData& band, double delta, const PhaseSpaceRegion& gamma, double eps)
      : band_(band), eps_(eps) {
    if (!band.gauged()) throw precondition_error("approx_projection: band has no gauge fixed");
    const Interval inner = band.lambda().shrink(delta);
    const Interval gq = gamma.q_hull();
    require(gq.lo > inner.lo && gq.hi < inner.hi,
            "approx_projection: Gamma_q = [" + std::to_string(gq.lo) + ", " + std::to_string(gq.hi) +
                "] is not inside Lambda - delta = (" + std::to_string(inner.lo) + ", " + std::to_string(inner.hi) + ")");
    weyl_ = weyl_quantize(symbols::indicator(SmoothIndicator(gamma)), band.grid(), eps);
    pstar_ = full_projection(band);
    cut_ = RVector::Ones(band.grid().ssize());
    if (std::isfinite(band.lambda().lo) || std::isfinite(band.lambda().hi)) {
      require(delta > 0.0, "approx_projection: delta must be positive for a bounded Lambda");
      IntervalIndicator ind(band.lambda(), delta);
      for (Eigen::Index i = 0; i < cut_.size(); ++i) cut_[i] = ind(band.grid().points()[i]);
    }
  }

  MolecularWave apply(const MolecularWave& psi) const {
    NuclearWave u = u_map(pstar_.apply(psi), band_);
    u.values = cut_.cast<Complex>().cwiseProduct(weyl_ * u.values);
    return u_star_map(u, band_);
  }

  CMatrix matrix() const {
    const Eigen::Index n = band_.grid().ssize();
    const int m = band_.fiber_dim();
    CMatrix ustar = CMatrix::Zero(n * m, n);
    for (Eigen::Index i = 0; i < n; ++i) ustar.block(i * m, i, m, 1) = band_.chi(i);
    CMatrix inner = cut_.cast<Complex>().asDiagonal() * weyl_;
    return pstar_.right_multiply(CMatrix(ustar * inner * ustar.adjoint()));
  }

  const CMatrix& weyl() const { return weyl_; }
  double epsilon() const { return eps_; }

 private:
  BandData band_;
  double eps_;
  CMatrix weyl_;
  ProjectionOperator pstar_;
  RVector cut_;
};

inline ApproxProjection approx_projection(const BandData& band, double delta, const PhaseSpaceRegion& gamma,
                                          double eps) {
  return ApproxProjection(band, delta, gamma, eps);
}

inline double theorem4_error(const SpectralPropagator& full, const SpectralPropagator& bo, const BandData& band,
                             const ApproxProjection& pg, const MolecularWave& psi0, double t,
                             std::optional<TimeWindow> window = std::nullopt) {
  return theorem4_error(full, bo, band, pg.apply(psi0), t, window);
}

// |<phi_t, a^W phi_t> - int a o Phi^t d rho|, phi_t = e^{-i H t/eps} phi.
inline double egorov_residual(const SpectralPropagator& h, const Symbol& a, const NuclearWave& phi,
                              const ClassicalDensity& rho, const Potential& e, double t, FlowOptions flow = {}) {
  require(h.fiber_dim == 1 && h.dimension() == phi.values.size(), "egorov_residual: needs a nuclear propagator");
  CMatrix aw = weyl_quantize(a, phi.grid, phi.epsilon);
  CVector pt = h.evolve(phi.values, t);
  const double quantum = pt.dot(aw * pt).real() * phi.grid.spacing();
  const double classical = transport(rho, e, t, flow).expectation(a);
  return std::abs(quantum - classical);
}

// ||(1 - 1_{Lambda - delta}) e^{-i H_BO t/eps} 1_(Gamma,alpha)^W phi0|| with a
// sharp cutoff 1_{Lambda - delta}.
inline double proposition3_leakage(const SpectralPropagator& bo, const Interval& lambda, double delta,
                                   const PhaseSpaceRegion& gamma, const NuclearWave& phi0, double t,
                                   std::optional<TimeWindow> window = std::nullopt) {
  if (window && (t > window->t_plus || t < window->t_minus))
    throw precondition_error("proposition3_leakage: t = " + std::to_string(t) + " outside [" +
                             std::to_string(window->t_minus) + ", " + std::to_string(window->t_plus) + "]");
  CMatrix w = weyl_quantize(symbols::indicator(SmoothIndicator(gamma)), phi0.grid, phi0.epsilon);
  CVector v = bo.evolve(w * phi0.values, t);
  const Interval inner = lambda.shrink(delta);
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (inner.contains(phi0.grid.points()[i])) v[i] = 0.0;
  return l2_norm(v, phi0.grid);
}

// max over states of ||(a^W (x) 1 - U* a^W U) 1_(Lambda,delta) P_* psi|| / ||psi||.
inline double proposition5_residual(const Symbol& a, const BandData& band, double delta, double eps,
                                    const std::vector<MolecularWave>& states) {
  if (!band.gauged()) throw precondition_error("proposition5_residual: band has no gauge fixed");
  F2Estimate f2 = f2_norm_estimate(a, band.grid());
  if (!f2.finite)
    throw precondition_error("proposition5_residual: symbol '" + a.name + "' fails the F2 integrability check (" +
                             f2.note + ")");
  const Grid1D& g = band.grid();
  const int m = band.fiber_dim();
  CMatrix aw = weyl_quantize(a, g, eps);
  ProjectionOperator pstar = full_projection(band);
  RVector cut = RVector::Ones(g.ssize());
  if (std::isfinite(band.lambda().lo) || std::isfinite(band.lambda().hi)) {
    IntervalIndicator ind(band.lambda(), delta);
    for (Eigen::Index i = 0; i < cut.size(); ++i) cut[i] = ind(g.points()[i]);
  }
  double worst = 0.0;
  for (const auto& psi : states) {
    require(psi.grid == g && psi.fiber_dim == m, "proposition5_residual: state shape mismatch");
    CVector v = pstar.apply(psi.values);
    for (Eigen::Index i = 0; i < g.ssize(); ++i) v.segment(i * m, m) *= cut[i];
    CVector lhs = apply_nuclear(aw, v, m);
    NuclearWave u = u_map(MolecularWave(g, m, eps, v), band);
    u.values = aw * u.values;
    CVector rhs = u_star_map(u, band).values;
    worst = std::max(worst, l2_norm(CVector(lhs - rhs), g) / norm(psi));
  }
  return worst;
}

}  // namespace bornopp
