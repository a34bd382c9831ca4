#pragma once

#include <functional>

#include "bornopp/semiclassics.hpp"

namespace bornopp {

// Envelope u -> profile(u); normalization is applied after sampling.
struct Profile {
  std::function<Complex(double)> f;
  std::string name;

  Complex operator()(double u) const { return f(u); }
};

namespace profiles {
inline Profile gaussian() {
  return {[](double u) { return Complex(std::exp(-0.5 * u * u) / std::pow(pi, 0.25)); }, "gaussian"};
}
// Asymmetric real envelope: the position mean is shifted by O(1) in u.
inline Profile gauss_poly() {
  return {[](double u) { return Complex((1.0 + u) * std::exp(-0.5 * u * u)); }, "gauss_poly"};
}
// Complex envelope with nonzero mean momentum in u-units.
inline Profile gauss_chirp() {
  return {[](double u) { return Complex(1.0, u) * std::exp(-0.5 * u * u); }, "gauss_chirp"};
}
inline Profile from_name(const std::string& name) {
  if (name == "gaussian") return gaussian();
  if (name == "gauss_poly") return gauss_poly();
  if (name == "gauss_chirp") return gauss_chirp();
  throw precondition_error("unknown profile '" + name + "' (available: gaussian, gauss_poly, gauss_chirp)");
}
}  // namespace profiles

struct SemiclassicalState {
  NuclearWave wave;
  ClassicalDensity density;
};

namespace detail {
inline void normalize(NuclearWave& w) {
  const double n = norm(w);
  require(n > 0.0, "state constructor: sampled state vanishes on the grid");
  w.values /= n;
}

inline double momentum_limit(const Grid1D& g, double eps) { return eps * pi / g.spacing(); }
}  // namespace detail

// phi(X) = eps^{-1/4} e^{i p0 (X - q0)/eps} profile((X - q0)/sqrt(eps)),
// classical density delta_(q0, p0).
inline SemiclassicalState coherent_state(const Grid1D& g, double eps, double q0, double p0,
                                         const Profile& profile = profiles::gaussian()) {
  require(eps > 0.0, "coherent_state: epsilon must be positive");
  const double w = 5.0 * std::sqrt(eps);
  require(q0 - w > g.x_min() && q0 + w < g.x_max(),
          "coherent_state: q0 = " + std::to_string(q0) + " lacks 5 sqrt(eps) clearance from the box edge (wrap-around)");
  require(std::abs(p0) + w < detail::momentum_limit(g, eps),
          "coherent_state: p0 = " + std::to_string(p0) + " lacks 5 sqrt(eps) clearance from the momentum window");
  CVector v(g.ssize());
  const double se = std::sqrt(eps);
  for (Eigen::Index i = 0; i < g.ssize(); ++i) {
    const double x = g.points()[i];
    v[i] = std::pow(eps, -0.25) * std::exp(imag_unit * (p0 * (x - q0) / eps)) * profile((x - q0) / se);
  }
  SemiclassicalState s{NuclearWave(g, eps, std::move(v)), ClassicalDensity::point(q0, p0)};
  detail::normalize(s.wave);
  return s;
}

// phi(X) = profile(X - center) e^{i p0 X / eps}: sharp in momentum, with
// density delta(p - p0) |profile(q - center)|^2.
inline SemiclassicalState sharp_momentum_state(const Grid1D& g, double eps, double p0,
                                               const Profile& profile = profiles::gaussian(), double center = 0.0) {
  require(eps > 0.0, "sharp_momentum_state: epsilon must be positive");
  double peak = 0.0;
  for (Eigen::Index i = 0; i < g.ssize(); ++i) peak = std::max(peak, std::abs(profile(g.points()[i] - center)));
  const double edge = std::max(std::abs(profile(g.x_min() - center)), std::abs(profile(g.x_max() - center)));
  require(edge <= 1e-8 * peak, "sharp_momentum_state: profile does not decay before the box edge (wrap-around)");
  require(std::abs(p0) + 5.0 * eps < detail::momentum_limit(g, eps),
          "sharp_momentum_state: p0 outside the momentum window");
  CVector v(g.ssize());
  std::vector<double> q, p, w;
  for (Eigen::Index i = 0; i < g.ssize(); ++i) {
    const double x = g.points()[i];
    const Complex a = profile(x - center);
    v[i] = a * std::exp(imag_unit * (p0 * x / eps));
    q.push_back(x);
    p.push_back(p0);
    w.push_back(std::norm(a));
  }
  SemiclassicalState s{NuclearWave(g, eps, std::move(v)), ClassicalDensity(q, p, w)};
  detail::normalize(s.wave);
  return s;
}

// phi(X) = eps^{-1/2} profile((X - q0)/eps): sharp in position, with density
// delta(q - q0) |profile^(p)|^2 (taken from the discrete momentum amplitudes).
inline SemiclassicalState sharp_position_state(const Grid1D& g, double eps, double q0,
                                               const Profile& profile = profiles::gaussian()) {
  require(eps > 0.0, "sharp_position_state: epsilon must be positive");
  require(q0 - 6 * eps > g.x_min() && q0 + 6 * eps < g.x_max(), "sharp_position_state: q0 too close to the box edge");
  require(detail::momentum_limit(g, eps) >= 6.0,
          "sharp_position_state: grid too coarse, need eps*pi/dx >= 6 to resolve the eps-width profile");
  CVector v(g.ssize());
  for (Eigen::Index i = 0; i < g.ssize(); ++i) v[i] = profile((g.points()[i] - q0) / eps) / std::sqrt(eps);
  NuclearWave wave(g, eps, std::move(v));
  detail::normalize(wave);
  CMatrix amp = momentum_representation(wave);
  std::vector<double> q, p, w;
  for (Eigen::Index j = 0; j < g.ssize(); ++j) {
    q.push_back(q0);
    p.push_back(eps * g.momenta()[j]);
    w.push_back(std::norm(amp(j, 0)));
  }
  return {std::move(wave), ClassicalDensity(q, p, w)};
}

// phi = f e^{i S/eps}, density f^2(q) delta(p - S'(q)) as a graph cloud.
inline SemiclassicalState wkb_state(const Grid1D& g, double eps, const std::function<double(double)>& f,
                                    const std::function<double(double)>& s,
                                    std::function<double(double)> ds = nullptr) {
  require(eps > 0.0, "wkb_state: epsilon must be positive");
  if (!ds) ds = [s](double x) { return detail::central_difference6(s, x, 1e-3); };
  double peak = 0.0;
  for (Eigen::Index i = 0; i < g.ssize(); ++i) peak = std::max(peak, std::abs(f(g.points()[i])));
  require(peak > 0.0, "wkb_state: amplitude vanishes on the grid");
  const double fl = f(g.x_min()), fr = f(g.x_max());
  const bool decayed = std::max(std::abs(fl), std::abs(fr)) <= 1e-8 * peak;
  if (!decayed) {
    const Complex jump = fr * std::exp(imag_unit * (s(g.x_max()) / eps)) - fl * std::exp(imag_unit * (s(g.x_min()) / eps));
    require(std::abs(jump) <= 1e-6 * peak,
            "wkb_state: f e^{iS/eps} is not periodic across the seam (S jumps by a non-multiple of 2 pi eps)");
  }
  for (Eigen::Index i = 0; i < g.ssize(); ++i) {
    const double x = g.points()[i];
    require(std::abs(f(x)) <= 1e-8 * peak || std::abs(ds(x)) < detail::momentum_limit(g, eps),
            "wkb_state: S'(" + std::to_string(x) + ") = " + std::to_string(ds(x)) +
                " lies outside the momentum window where the amplitude is not negligible");
  }
  CVector v(g.ssize());
  std::vector<double> q, p, w;
  for (Eigen::Index i = 0; i < g.ssize(); ++i) {
    const double x = g.points()[i];
    v[i] = f(x) * std::exp(imag_unit * (s(x) / eps));
    q.push_back(x);
    p.push_back(ds(x));
    w.push_back(f(x) * f(x));
  }
  SemiclassicalState st{NuclearWave(g, eps, std::move(v)), ClassicalDensity(q, p, w)};
  detail::normalize(st.wave);
  return st;
}

inline MolecularWave lift_to_band(const NuclearWave& phi, const BandData& band) { return u_star_map(phi, band); }

// Lift along the continued eigenvector of band b; needs no gauge and passes
// through crossings inside a multi-band selection.
inline MolecularWave lift_to_tracked_band(const NuclearWave& phi, const BandData& band, int b) {
  require(phi.grid == band.grid(), "lift_to_tracked_band: grid mismatch");
  require(b >= 0 && b < band.fiber_dim(), "lift_to_tracked_band: band index out of range");
  const Eigen::Index n = phi.grid.ssize();
  const int m = band.fiber_dim();
  CVector out(n * m);
  for (Eigen::Index i = 0; i < n; ++i)
    out.segment(i * m, m) = phi.values[i] * band.eigenvectors()[static_cast<std::size_t>(i)].col(b);
  return MolecularWave(phi.grid, m, phi.epsilon, std::move(out));
}

// <phi, a^W phi> versus int a d rho for one state.
inline double observable_error(const SemiclassicalState& s, const Symbol& a) {
  CMatrix aw = weyl_quantize(a, s.wave.grid, s.wave.epsilon);
  const double quantum = s.wave.values.dot(aw * s.wave.values).real() * s.wave.grid.spacing();
  return std::abs(quantum - s.density.expectation(a));
}

}  // namespace bornopp
