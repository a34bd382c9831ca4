#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

#include "bornopp/grid.hpp"
#include "bornopp/models.hpp"

namespace bornopp {

enum class Gauge { none, parallel_transport, reference_component };

inline std::string to_string(Gauge g) {
  switch (g) {
    case Gauge::none: return "none";
    case Gauge::parallel_transport: return "parallel_transport";
    case Gauge::reference_component: return "reference_component";
  }
  return "none";
}

inline Gauge gauge_from_string(const std::string& s) {
  if (s == "none") return Gauge::none;
  if (s == "parallel_transport") return Gauge::parallel_transport;
  if (s == "reference_component") return Gauge::reference_component;
  throw precondition_error("unknown gauge '" + s +
                           "' (available: none, parallel_transport, reference_component)");
}

struct BandOptions {
  Interval lambda = Interval::whole();
  Gauge gauge = Gauge::parallel_transport;
  int reference_component = -1;  // -1: pick the component farthest from zero
  double fd_step = 1e-2;
  double degeneracy_tol = 1e-9;
};

struct Eigensystem {
  RVector values;   // column j belongs to tracked band j
  CMatrix vectors;
};

namespace detail {

inline Eigensystem sorted_eigensystem(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  if (es.info() != Eigen::Success) throw numerical_error("fiber eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

// Groups ascending eigenvalues into clusters of (near) equal values.
inline std::vector<std::vector<int>> clusters(const RVector& w, double tol) {
  std::vector<std::vector<int>> out;
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  for (int a = 0; a < static_cast<int>(w.size()); ++a) {
    if (!out.empty() && std::abs(w[a] - w[out.back().back()]) <= tol * scale)
      out.back().push_back(a);
    else
      out.push_back({a});
  }
  return out;
}

// Relabels a fresh eigensystem so that column j continues the previous
// tracked column j. Degenerate clusters are resolved by projecting the
// previous vectors onto the cluster eigenspace (Loewdin orthonormalized).
// Nondegenerate columns get their phase aligned with the previous vector.
inline Eigensystem continue_from(const CMatrix& h, const CMatrix& prev, double tol) {
  Eigensystem fresh = sorted_eigensystem(h);
  const int m = static_cast<int>(h.rows());
  auto groups = clusters(fresh.values, tol);

  // overlap weight of previous label j with each cluster
  const int nc = static_cast<int>(groups.size());
  RMatrix weight(m, nc);
  for (int c = 0; c < nc; ++c) {
    CMatrix basis(m, static_cast<Eigen::Index>(groups[c].size()));
    for (std::size_t t = 0; t < groups[c].size(); ++t) basis.col(static_cast<Eigen::Index>(t)) = fresh.vectors.col(groups[c][t]);
    for (int j = 0; j < m; ++j) weight(j, c) = (basis.adjoint() * prev.col(j)).squaredNorm();
  }
  // greedy assignment with capacities |cluster|
  std::vector<std::tuple<double, int, int>> pairs;
  for (int j = 0; j < m; ++j)
    for (int c = 0; c < nc; ++c) pairs.emplace_back(-weight(j, c), j, c);
  std::sort(pairs.begin(), pairs.end());
  std::vector<int> label_cluster(static_cast<std::size_t>(m), -1);
  std::vector<int> capacity(static_cast<std::size_t>(nc));
  for (int c = 0; c < nc; ++c) capacity[static_cast<std::size_t>(c)] = static_cast<int>(groups[c].size());
  for (auto& [w, j, c] : pairs) {
    (void)w;
    if (label_cluster[static_cast<std::size_t>(j)] >= 0 || capacity[static_cast<std::size_t>(c)] == 0) continue;
    label_cluster[static_cast<std::size_t>(j)] = c;
    --capacity[static_cast<std::size_t>(c)];
  }

  Eigensystem out{RVector(m), CMatrix(m, m)};
  for (int c = 0; c < nc; ++c) {
    std::vector<int> labels;
    for (int j = 0; j < m; ++j)
      if (label_cluster[static_cast<std::size_t>(j)] == c) labels.push_back(j);
    const auto& g = groups[c];
    if (g.size() == 1) {
      const int j = labels[0];
      CVector v = fresh.vectors.col(g[0]);
      Complex o = prev.col(j).dot(v);
      if (std::abs(o) > 0) v *= std::conj(o) / std::abs(o);
      out.vectors.col(j) = v;
      out.values[j] = fresh.values[g[0]];
      continue;
    }
    CMatrix basis(m, static_cast<Eigen::Index>(g.size()));
    for (std::size_t t = 0; t < g.size(); ++t) basis.col(static_cast<Eigen::Index>(t)) = fresh.vectors.col(g[t]);
    CMatrix y(m, static_cast<Eigen::Index>(labels.size()));
    for (std::size_t t = 0; t < labels.size(); ++t)
      y.col(static_cast<Eigen::Index>(t)) = basis * (basis.adjoint() * prev.col(labels[t]));
    // Loewdin: y (y^* y)^{-1/2}
    Eigen::SelfAdjointEigenSolver<CMatrix> s(y.adjoint() * y);
    RVector ev = s.eigenvalues();
    if (ev.minCoeff() < 1e-12) {
      // previous vectors nearly orthogonal to the cluster: fall back to its basis
      y = basis.leftCols(static_cast<Eigen::Index>(labels.size()));
    } else {
      RVector inv_sqrt = ev.cwiseSqrt().cwiseInverse();
      y = y * (s.eigenvectors() * inv_sqrt.asDiagonal() * s.eigenvectors().adjoint());
    }
    for (std::size_t t = 0; t < labels.size(); ++t) {
      const int j = labels[t];
      out.vectors.col(j) = y.col(static_cast<Eigen::Index>(t));
      out.values[j] = (y.col(static_cast<Eigen::Index>(t)).adjoint() * h * y.col(static_cast<Eigen::Index>(t)))(0, 0).real();
    }
  }
  return out;
}

// Nodes and weights of 5-point Gauss-Legendre on [-1, 1].
inline const std::array<std::pair<double, double>, 5>& gauss5() {
  static const std::array<std::pair<double, double>, 5> r = {{
      {0.0, 128.0 / 225.0},
      {-0.5384693101056831, 0.4786286704993665},
      {0.5384693101056831, 0.4786286704993665},
      {-0.9061798459386640, 0.2369268850561891},
      {0.9061798459386640, 0.2369268850561891},
  }};
  return r;
}

template <typename F>
auto central_difference6(F&& f, double x, double h) {
  using R = std::decay_t<decltype(f(x))>;
  return R((-f(x - 3 * h) + 9.0 * f(x - 2 * h) - 45.0 * f(x - h) + 45.0 * f(x + h) -
          9.0 * f(x + 2 * h) + f(x + 3 * h)) /
           (60.0 * h));
}

}  // namespace detail

// Per-grid-point band decomposition of H_e(X) over a grid, with band
// identity tracked by overlap continuation from an anchor (the leftmost grid
// point of Lambda, where bands are labelled in ascending order). For a
// single selected band an eigenvector gauge can be fixed; the gauge is a
// continuum object chi(X) = exp(i theta(X)) chi_ref(X), where chi_ref has
// a fixed reference component real and positive.
class BandData {
 public:
  BandData() = default;

  const Grid1D& grid() const { return grid_; }
  const ElectronicModel& model() const { return model_; }
  const std::vector<int>& bands() const { return bands_; }
  const Interval& lambda() const { return opts_.lambda; }
  const BandOptions& options() const { return opts_; }
  bool in_lambda(Eigen::Index i) const { return mask_[static_cast<std::size_t>(i)] != 0; }
  const std::vector<char>& lambda_mask() const { return mask_; }
  Eigen::Index anchor() const { return anchor_; }
  int fiber_dim() const { return model_.fiber_dim(); }

  const RMatrix& energies() const { return energies_; }
  const std::vector<CMatrix>& eigenvectors() const { return vectors_; }
  const CMatrix& projection(Eigen::Index i) const { return projections_[static_cast<std::size_t>(i)]; }

  bool gauged() const { return gauge_ != Gauge::none; }
  Gauge gauge() const { return gauge_; }
  int reference_component() const { return ref_; }
  int band() const { return bands_.front(); }

  // Gauged eigenvector on the grid (extended over the whole box).
  const CVector& chi(Eigen::Index i) const {
    require_gauge("chi");
    return chi_[static_cast<std::size_t>(i)];
  }
  const RVector& connection() const {
    require_gauge("connection");
    return connection_;
  }
  RVector band_energy() const { return energies_.col(bands_.front()); }

  // --- continuum evaluation --------------------------------------------------

  Eigensystem eigensystem_at(double x) const {
    const auto i = static_cast<std::size_t>(grid_.nearest_index(x));
    return detail::continue_from(model_(x), vectors_[i], opts_.degeneracy_tol);
  }

  CMatrix projection_at(double x) const {
    Eigensystem es = eigensystem_at(x);
    CMatrix p = CMatrix::Zero(fiber_dim(), fiber_dim());
    for (int b : bands_) p += es.vectors.col(b) * es.vectors.col(b).adjoint();
    return p;
  }

  double energy_at(double x) const { return eigensystem_at(x).values[band()]; }

  // Hellmann-Feynman: E'(X) = <chi, H_e'(X) chi>.
  double energy_gradient_at(double x) const {
    CVector v = eigensystem_at(x).vectors.col(band());
    return (v.adjoint() * model_.derivative(x, opts_.fd_step) * v)(0, 0).real();
  }

  CVector chi_at(double x) const {
    require_gauge("chi_at");
    return std::exp(imag_unit * (theta_at(x) + shift_value(x))) * chi_ref_at(x);
  }

  double connection_at(double x) const {
    require_gauge("connection_at");
    double a = shift_slope(x);
    if (gauge_ == Gauge::reference_component) a += reference_connection_at(x);
    return a;
  }

  // Returns the same band with chi -> exp(i theta) chi; A_geo shifts by theta'.
  BandData with_gauge_shift(std::function<double(double)> theta,
                            std::function<double(double)> dtheta) const {
    require_gauge("with_gauge_shift");
    BandData out = *this;
    auto old_t = shift_;
    auto old_dt = dshift_;
    out.shift_ = [old_t, theta](double x) { return (old_t ? old_t(x) : 0.0) + theta(x); };
    out.dshift_ = [old_dt, dtheta](double x) { return (old_dt ? old_dt(x) : 0.0) + dtheta(x); };
    for (Eigen::Index i = 0; i < grid_.ssize(); ++i) {
      const double x = grid_.points()[i];
      out.chi_[static_cast<std::size_t>(i)] *= std::exp(imag_unit * theta(x));
      out.connection_[i] += dtheta(x);
    }
    return out;
  }

 private:
  friend BandData band_decompose(const ElectronicModel&, const Grid1D&, std::vector<int>, BandOptions);

  void require_gauge(const char* what) const {
    if (!gauged()) throw precondition_error(std::string(what) + ": band has no gauge fixed");
  }

  CVector chi_ref_at(double x) const {
    CVector v = eigensystem_at(x).vectors.col(band());
    const Complex r = v[ref_];
    return v * (std::conj(r) / std::abs(r));
  }

  double reference_connection_at(double x) const {
    const double h = opts_.fd_step;
    CVector c = chi_ref_at(x);
    CVector d = detail::central_difference6([this](double s) { return CVector(chi_ref_at(s)); }, x, h);
    return c.dot(d).imag();
  }

  // Parallel-transport phase: theta' = -A_ref, integrated from the nearest
  // grid point with Gauss-Legendre.
  double theta_at(double x) const {
    if (gauge_ != Gauge::parallel_transport) return theta0_;
    const auto i = static_cast<Eigen::Index>(grid_.nearest_index(x));
    const double xi = grid_.points()[i];
    return theta_grid_[i] + integrate_minus_aref(xi, x);
  }

  double integrate_minus_aref(double a, double b) const {
    if (a == b) return 0.0;
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double s = 0.0;
    for (auto [t, w] : detail::gauss5()) s += w * reference_connection_at(mid + half * t);
    return -half * s;
  }

  double shift_value(double x) const { return shift_ ? shift_(x) : 0.0; }
  double shift_slope(double x) const { return dshift_ ? dshift_(x) : 0.0; }

  Grid1D grid_;
  ElectronicModel model_;
  std::vector<int> bands_;
  BandOptions opts_;
  std::vector<char> mask_;
  Eigen::Index anchor_ = 0;
  RMatrix energies_;
  std::vector<CMatrix> vectors_;
  std::vector<CMatrix> projections_;

  Gauge gauge_ = Gauge::none;
  int ref_ = 0;
  double theta0_ = 0.0;
  RVector theta_grid_;
  std::vector<CVector> chi_;
  RVector connection_;
  std::function<double(double)> shift_;
  std::function<double(double)> dshift_;
};

inline BandData band_decompose(const ElectronicModel& model, const Grid1D& grid,
                               std::vector<int> bands, BandOptions opts = {}) {
  const int m = model.fiber_dim();
  const Eigen::Index n = grid.ssize();
  require(!bands.empty(), "band_decompose: empty band selection");
  std::sort(bands.begin(), bands.end());
  bands.erase(std::unique(bands.begin(), bands.end()), bands.end());
  for (int b : bands) require(b >= 0 && b < m, "band_decompose: band index out of range");

  BandData bd;
  bd.grid_ = grid;
  bd.model_ = model;
  bd.bands_ = bands;
  bd.opts_ = opts;
  bd.mask_.assign(static_cast<std::size_t>(n), 0);
  Eigen::Index anchor = -1;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (opts.lambda.contains(grid.points()[i])) {
      bd.mask_[static_cast<std::size_t>(i)] = 1;
      if (anchor < 0) anchor = i;
    }
  }
  require(anchor >= 0, "band_decompose: Lambda contains no grid point");
  bd.anchor_ = anchor;

  bd.energies_.resize(n, m);
  bd.vectors_.assign(static_cast<std::size_t>(n), CMatrix());
  {
    Eigensystem es = detail::sorted_eigensystem(model(grid.points()[anchor]));
    bd.vectors_[static_cast<std::size_t>(anchor)] = es.vectors;
    bd.energies_.row(anchor) = es.values.transpose();
  }
  auto step = [&](Eigen::Index from, Eigen::Index to) {
    Eigensystem es = detail::continue_from(model(grid.points()[to]),
                                           bd.vectors_[static_cast<std::size_t>(from)], opts.degeneracy_tol);
    bd.vectors_[static_cast<std::size_t>(to)] = es.vectors;
    bd.energies_.row(to) = es.values.transpose();
  };
  for (Eigen::Index i = anchor + 1; i < n; ++i) step(i - 1, i);
  for (Eigen::Index i = anchor - 1; i >= 0; --i) step(i + 1, i);

  bd.projections_.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    CMatrix p = CMatrix::Zero(m, m);
    for (int b : bands) p += bd.vectors_[static_cast<std::size_t>(i)].col(b) * bd.vectors_[static_cast<std::size_t>(i)].col(b).adjoint();
    bd.projections_[static_cast<std::size_t>(i)] = 0.5 * (p + p.adjoint());
  }

  if (opts.gauge == Gauge::none) return bd;
  require(bands.size() == 1, "band_decompose: a gauge needs exactly one selected band");
  const int b = bands.front();

  // nondegeneracy inside Lambda
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!bd.in_lambda(i)) continue;
    const double scale = std::max(1.0, bd.energies_.row(i).cwiseAbs().maxCoeff());
    for (int a = 0; a < m; ++a) {
      if (a == b) continue;
      if (std::abs(bd.energies_(i, a) - bd.energies_(i, b)) <= 1e3 * opts.degeneracy_tol * scale)
        throw precondition_error("band_decompose: band " + std::to_string(b) +
                                 " is degenerate inside Lambda at X = " +
                                 std::to_string(grid.points()[i]) + "; no gauge can be fixed");
    }
  }

  // reference component
  if (opts.reference_component >= 0) {
    require(opts.reference_component < m, "band_decompose: reference component out of range");
    bd.ref_ = opts.reference_component;
  } else {
    double best = -1.0;
    for (int r = 0; r < m; ++r) {
      double lo = infinity;
      for (Eigen::Index i = 0; i < n; ++i) lo = std::min(lo, std::abs(bd.vectors_[static_cast<std::size_t>(i)](r, b)));
      if (lo > best) {
        best = lo;
        bd.ref_ = r;
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i)
    if (bd.in_lambda(i) && std::abs(bd.vectors_[static_cast<std::size_t>(i)](bd.ref_, b)) < 1e-8)
      throw numerical_error("band_decompose: reference component vanishes inside Lambda");

  bd.gauge_ = opts.gauge;
  const double xa = grid.points()[anchor];
  // anchor convention: first nonzero component of chi(anchor) real positive
  {
    CVector c = bd.chi_ref_at(xa);
    for (int a = 0; a < m; ++a)
      if (std::abs(c[a]) > 1e-10) {
        bd.theta0_ = -std::arg(c[a]);
        break;
      }
  }
  bd.theta_grid_ = RVector::Constant(n, bd.theta0_);
  if (opts.gauge == Gauge::parallel_transport) {
    // theta(x_i) = theta0 - integral_{x_anchor}^{x_i} A_ref
    for (Eigen::Index i = anchor + 1; i < n; ++i)
      bd.theta_grid_[i] = bd.theta_grid_[i - 1] + bd.integrate_minus_aref(grid.points()[i - 1], grid.points()[i]);
    for (Eigen::Index i = anchor - 1; i >= 0; --i)
      bd.theta_grid_[i] = bd.theta_grid_[i + 1] + bd.integrate_minus_aref(grid.points()[i + 1], grid.points()[i]);
  }
  bd.chi_.resize(static_cast<std::size_t>(n));
  bd.connection_ = RVector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = grid.points()[i];
    bd.chi_[static_cast<std::size_t>(i)] = std::exp(imag_unit * bd.theta_grid_[i]) * bd.chi_ref_at(x);
    if (opts.gauge == Gauge::reference_component) bd.connection_[i] = bd.reference_connection_at(x);
  }
  return bd;
}

// A_geo(X_i) = -i <chi, d chi/dX> on the grid (valid where the gauge is
// smooth; Lambda at least).
inline RVector berry_connection(const BandData& band) {
  if (!band.gauged()) throw precondition_error("berry_connection: gauge not fixed");
  return band.connection();
}

struct GapReport {
  RVector f_minus;
  RVector f_plus;
  double distance = infinity;  // achieved min over Lambda of dist(sigma_*, rest)
  double margin = infinity;    // Condition S margin for the mid-gap curves: distance/2
  bool holds = false;
  bool interleaved = false;    // a foreign eigenvalue sits between selected ones
  double location = 0.0;       // X of the minimal gap
};

// Condition S on Lambda with mid-gap enclosing curves f_-, f_+.
inline GapReport gap_check(const BandData& band, double d_request) {
  const Eigen::Index n = band.grid().ssize();
  const int m = band.fiber_dim();
  std::vector<char> sel(static_cast<std::size_t>(m), 0);
  for (int b : band.bands()) sel[static_cast<std::size_t>(b)] = 1;

  GapReport r;
  r.f_minus = RVector::Constant(n, std::numeric_limits<double>::quiet_NaN());
  r.f_plus = r.f_minus;
  std::vector<std::pair<double, double>> local(static_cast<std::size_t>(n));  // (below, above) gaps
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!band.in_lambda(i)) continue;
    double smin = infinity, smax = -infinity;
    for (int a = 0; a < m; ++a)
      if (sel[static_cast<std::size_t>(a)]) {
        smin = std::min(smin, band.energies()(i, a));
        smax = std::max(smax, band.energies()(i, a));
      }
    double below = -infinity, above = infinity, dist = infinity;
    for (int a = 0; a < m; ++a) {
      if (sel[static_cast<std::size_t>(a)]) continue;
      const double e = band.energies()(i, a);
      for (int s = 0; s < m; ++s)
        if (sel[static_cast<std::size_t>(s)]) dist = std::min(dist, std::abs(e - band.energies()(i, s)));
      if (e < smin) below = std::max(below, e);
      else if (e > smax) above = std::min(above, e);
      else r.interleaved = true;
    }
    if (dist < r.distance) {
      r.distance = dist;
      r.location = band.grid().points()[i];
    }
    local[static_cast<std::size_t>(i)] = {below, above};
    r.f_minus[i] = std::isfinite(below) ? 0.5 * (below + smin) : smin;
    r.f_plus[i] = std::isfinite(above) ? 0.5 * (above + smax) : smax;
  }
  r.margin = 0.5 * r.distance;
  // sides without foreign eigenvalues get the uniform margin as clearance
  const double pad = std::isfinite(r.margin) ? r.margin : 1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!band.in_lambda(i)) continue;
    if (!std::isfinite(local[static_cast<std::size_t>(i)].first)) r.f_minus[i] -= pad;
    if (!std::isfinite(local[static_cast<std::size_t>(i)].second)) r.f_plus[i] += pad;
  }
  r.holds = !r.interleaved && r.distance > 0.0 && r.distance >= d_request;
  return r;
}

// Circle gamma(X) = {center(X) + radius(X) e^{i phi}} for the Riesz formula.
struct ContourSpec {
  std::function<double(double)> center;
  std::function<double(double)> radius;
  int nodes = 128;
  double clearance = 0.0;  // minimum admissible eigenvalue distance to the circle
};

// Circle through the mid-gaps around the selected bands of `band`.
inline ContourSpec contour_around(const BandData& band, int nodes = 128) {
  ContourSpec c;
  auto geometry = [band](double x) {
    Eigensystem es = band.eigensystem_at(x);
    const int m = band.fiber_dim();
    std::vector<char> sel(static_cast<std::size_t>(m), 0);
    for (int b : band.bands()) sel[static_cast<std::size_t>(b)] = 1;
    double smin = infinity, smax = -infinity, gap = infinity;
    for (int a = 0; a < m; ++a)
      if (sel[static_cast<std::size_t>(a)]) {
        smin = std::min(smin, es.values[a]);
        smax = std::max(smax, es.values[a]);
      }
    for (int a = 0; a < m; ++a)
      if (!sel[static_cast<std::size_t>(a)])
        gap = std::min({gap, std::abs(es.values[a] - smin), std::abs(es.values[a] - smax)});
    if (!std::isfinite(gap)) gap = 2.0;
    return std::pair<double, double>{0.5 * (smin + smax), 0.5 * (smax - smin) + 0.5 * gap};
  };
  c.center = [geometry](double x) { return geometry(x).first; };
  c.radius = [geometry](double x) { return geometry(x).second; };
  c.nodes = nodes;
  c.clearance = 0.0;
  return c;
}

// P = -(1/2 pi i) \oint (H - lambda)^{-1} d lambda, trapezoid rule on the circle.
inline CMatrix riesz_projection(const ElectronicModel& model, double x, const ContourSpec& contour) {
  require(contour.nodes >= 64, "riesz_projection: need at least 64 quadrature nodes");
  const CMatrix h = model(x);
  const int m = model.fiber_dim();
  const double c = contour.center(x), r = contour.radius(x);
  require(r > 0.0, "riesz_projection: radius must be positive");
  Eigensystem es = detail::sorted_eigensystem(h);
  for (int a = 0; a < m; ++a) {
    const double gap = std::abs(std::abs(es.values[a] - c) - r);
    if (gap <= std::max(contour.clearance, 1e-12))
      throw precondition_error("riesz_projection: eigenvalue " + std::to_string(es.values[a]) +
                               " lies within the contour clearance");
  }
  CMatrix p = CMatrix::Zero(m, m);
  const CMatrix id = CMatrix::Identity(m, m);
  for (int j = 0; j < contour.nodes; ++j) {
    const Complex e = std::exp(imag_unit * (2.0 * pi * j / contour.nodes));
    const Complex lambda = c + r * e;
    p += e * (h - lambda * id).inverse();
  }
  return p * (-r / static_cast<double>(contour.nodes));
}

// Spectral oracle for the projection onto eigenvalues inside the circle.
inline CMatrix spectral_projection(const CMatrix& h, double center, double radius) {
  Eigensystem es = detail::sorted_eigensystem(h);
  CMatrix p = CMatrix::Zero(h.rows(), h.cols());
  for (Eigen::Index a = 0; a < h.rows(); ++a)
    if (std::abs(es.values[a] - center) < radius) p += es.vectors.col(a) * es.vectors.col(a).adjoint();
  return p;
}

// d P_*/dX on every grid point (sixth-order central difference of the
// continuum projection; meaningful where the gap stays open).
inline std::vector<CMatrix> grad_projection(const BandData& band) {
  const Eigen::Index n = band.grid().ssize();
  std::vector<CMatrix> out(static_cast<std::size_t>(n));
  if (band.model().x_independent()) {
    for (auto& g : out) g = CMatrix::Zero(band.fiber_dim(), band.fiber_dim());
    return out;
  }
  const double h = band.options().fd_step;
  for (Eigen::Index i = 0; i < n; ++i) {
    CMatrix d = detail::central_difference6([&band](double s) { return CMatrix(band.projection_at(s)); },
                                            band.grid().points()[i], h);
    out[static_cast<std::size_t>(i)] = 0.5 * (d + d.adjoint());
  }
  return out;
}

inline CMatrix grad_projection_at(const BandData& band, double x) {
  if (band.model().x_independent()) return CMatrix::Zero(band.fiber_dim(), band.fiber_dim());
  CMatrix d = detail::central_difference6([&band](double s) { return CMatrix(band.projection_at(s)); }, x,
                                          band.options().fd_step);
  return 0.5 * (d + d.adjoint());
}

}  // namespace bornopp
