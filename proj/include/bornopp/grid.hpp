#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "bornopp/core.hpp"

namespace bornopp {

// Periodic grid x_i = x_min + i*dx, i = 0..n-1, dx = (x_max - x_min)/n.
//
// Momentum lattice in FFT order: k_j = (2*pi/L) * j for j < n/2 and
// (2*pi/L) * (j - n) otherwise, so the Nyquist mode sits at index n/2 with
// the negative value -pi/dx.
class Grid1D {
 public:
  Grid1D() = default;

  Grid1D(double x_min, double x_max, std::size_t n_points)
      : x_min_(x_min), x_max_(x_max), n_(n_points) {
    require(std::isfinite(x_min) && std::isfinite(x_max) && x_max > x_min,
            "grid: degenerate interval, need x_max > x_min");
    require(n_points >= 8 && (n_points & (n_points - 1)) == 0,
            "grid: n_points must be a power of two >= 8, got " +
                std::to_string(n_points));
    dx_ = (x_max - x_min) / static_cast<double>(n_points);
    x_.resize(static_cast<Eigen::Index>(n_));
    k_.resize(static_cast<Eigen::Index>(n_));
    const double dk = 2.0 * pi / length();
    const auto n = static_cast<long>(n_);
    for (long j = 0; j < n; ++j) {
      x_[j] = x_min + static_cast<double>(j) * dx_;
      k_[j] = dk * static_cast<double>(j < n / 2 ? j : j - n);
    }
  }

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double length() const { return x_max_ - x_min_; }
  double spacing() const { return dx_; }
  double dk() const { return 2.0 * pi / length(); }
  std::size_t size() const { return n_; }
  Eigen::Index ssize() const { return static_cast<Eigen::Index>(n_); }
  double point(std::size_t i) const { return x_[static_cast<Eigen::Index>(i)]; }
  const RVector& points() const { return x_; }
  const RVector& momenta() const { return k_; }

  // Index of the grid point nearest to x (clamped to the box).
  std::size_t nearest_index(double x) const {
    double r = std::round((x - x_min_) / dx_);
    r = std::clamp(r, 0.0, static_cast<double>(n_ - 1));
    return static_cast<std::size_t>(r);
  }

  friend bool operator==(const Grid1D& a, const Grid1D& b) {
    return a.x_min_ == b.x_min_ && a.x_max_ == b.x_max_ && a.n_ == b.n_;
  }

 private:
  double x_min_ = 0.0;
  double x_max_ = 1.0;
  std::size_t n_ = 0;
  double dx_ = 0.0;
  RVector x_;
  RVector k_;
};

inline Grid1D make_grid(double x_min, double x_max, std::size_t n_points) {
  return Grid1D(x_min, x_max, n_points);
}

// Unnormalized forward DFT and 1/n-normalized inverse (numpy convention).
inline CVector fft(const CVector& v) {
  thread_local Eigen::FFT<double> engine;
  std::vector<Complex> in(v.data(), v.data() + v.size()), out;
  engine.fwd(out, in);
  return Eigen::Map<CVector>(out.data(), static_cast<Eigen::Index>(out.size()));
}

inline CVector ifft(const CVector& v) {
  thread_local Eigen::FFT<double> engine;
  std::vector<Complex> in(v.data(), v.data() + v.size()), out;
  engine.inv(out, in);
  return Eigen::Map<CVector>(out.data(), static_cast<Eigen::Index>(out.size()));
}

struct NuclearWave {
  Grid1D grid;
  double epsilon = 1.0;
  CVector values;

  NuclearWave() = default;
  NuclearWave(Grid1D g, double eps, CVector v)
      : grid(std::move(g)), epsilon(eps), values(std::move(v)) {
    require(values.size() == grid.ssize(), "nuclear wave: length mismatch");
  }
  static constexpr int fiber_dim = 1;
};

// Grid-major storage: values[i*m + a] = psi_a(x_i).
struct MolecularWave {
  Grid1D grid;
  int fiber_dim = 1;
  double epsilon = 1.0;
  CVector values;

  MolecularWave() = default;
  MolecularWave(Grid1D g, int m, double eps, CVector v)
      : grid(std::move(g)), fiber_dim(m), epsilon(eps), values(std::move(v)) {
    require(m >= 1, "molecular wave: fiber dimension must be positive");
    require(values.size() == grid.ssize() * m, "molecular wave: length mismatch");
  }

  CVector fiber(Eigen::Index i) const { return values.segment(i * fiber_dim, fiber_dim); }

  CVector component(int a) const {
    CVector c(grid.ssize());
    for (Eigen::Index i = 0; i < grid.ssize(); ++i) c[i] = values[i * fiber_dim + a];
    return c;
  }

  void set_component(int a, const CVector& c) {
    for (Eigen::Index i = 0; i < grid.ssize(); ++i) values[i * fiber_dim + a] = c[i];
  }
};

template <typename W>
concept GridWave = requires(const W& w) {
  { w.grid } -> std::convertible_to<Grid1D>;
  { w.values } -> std::convertible_to<CVector>;
  { w.fiber_dim } -> std::convertible_to<int>;
  { w.epsilon } -> std::convertible_to<double>;
};

namespace detail {

inline CVector strided_component(const CVector& v, Eigen::Index n, int m, int a) {
  CVector c(n);
  for (Eigen::Index i = 0; i < n; ++i) c[i] = v[i * m + a];
  return c;
}
}  // namespace detail

// Discrete L2 norm (sum |psi|^2 dx)^(1/2).
inline double l2_norm(const CVector& values, const Grid1D& grid) {
  return std::sqrt(grid.spacing()) * values.norm();
}

template <GridWave W>
double norm(const W& w) {
  return l2_norm(w.values, w.grid);
}

template <GridWave W>
Complex inner(const W& a, const W& b) {
  return a.values.dot(b.values) * a.grid.spacing();
}

// Continuum-normalized momentum amplitudes, one column per fiber component:
// phi~(k) = dx/sqrt(2 pi) * sum_j phi(x_j) e^{-i k x_j}.
template <GridWave W>
CMatrix momentum_representation(const W& w) {
  const Grid1D& g = w.grid;
  const int m = w.fiber_dim;
  const Eigen::Index n = g.ssize();
  CMatrix out(n, m);
  const double scale = g.spacing() / std::sqrt(2.0 * pi);
  for (int a = 0; a < m; ++a) {
    CVector f = fft(detail::strided_component(w.values, n, m, a));
    for (Eigen::Index j = 0; j < n; ++j)
      out(j, a) = scale * f[j] * std::exp(-imag_unit * g.momenta()[j] * g.x_min());
  }
  return out;
}

template <GridWave W>
double momentum_norm(const W& w) {
  return std::sqrt(w.grid.dk()) * momentum_representation(w).norm();
}

// (-i d/dx)^power applied spectrally to one periodic sample vector.
inline CVector spectral_derivative(const CVector& v, const Grid1D& g, int power = 1) {
  CVector f = fft(v);
  for (Eigen::Index j = 0; j < g.ssize(); ++j) f[j] *= std::pow(g.momenta()[j], power);
  return ifft(f);
}

// Applies (-i d/dx)^power to every fiber component of a grid-major vector.
inline CVector spectral_derivative_fibered(const CVector& v, const Grid1D& g, int m,
                                           int power = 1) {
  CVector out(v.size());
  const Eigen::Index n = g.ssize();
  for (int a = 0; a < m; ++a) {
    CVector d = spectral_derivative(detail::strided_component(v, n, m, a), g, power);
    for (Eigen::Index i = 0; i < n; ++i) out[i * m + a] = d[i];
  }
  return out;
}

// epsilon-scaled Sobolev norms:
//   order 1: || eps |grad psi| || + ||psi||
//   order 2: || eps^2 Laplace psi || + ||psi||
template <GridWave W>
double sobolev_norm(const W& w, int order) {
  require(order == 1 || order == 2, "sobolev_norm: order must be 1 or 2");
  const int m = w.fiber_dim;
  const double eps = w.epsilon;
  CVector d = spectral_derivative_fibered(w.values, w.grid, m, order);
  return std::pow(eps, order) * l2_norm(d, w.grid) + norm(w);
}

// Dense matrix of -i d/dx on periodic samples. It is circulant,
// D_ij = c[(i - j) mod n] with c = ifft(k), hence Hermitian and
// diagonalized by the DFT with eigenvalues equal to the momentum lattice.
inline CMatrix spectral_derivative_matrix(const Grid1D& g) {
  const Eigen::Index n = g.ssize();
  CVector k = g.momenta().cast<Complex>();
  CVector c = ifft(k);
  CMatrix d(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) d(i, j) = c[(i - j + n) % n];
  return d;
}

}  // namespace bornopp
