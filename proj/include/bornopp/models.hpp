#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "bornopp/core.hpp"

namespace bornopp {

// A smooth family X -> H_e(X) of m x m Hermitian fiber Hamiltonians.
class ElectronicModel {
 public:
  using Fiber = std::function<CMatrix(double)>;
  using Params = std::map<std::string, double>;

  ElectronicModel() = default;
  ElectronicModel(std::string tag, int fiber_dim, Fiber h, Fiber dh = nullptr, Params params = {},
                  bool x_independent = false)
      : tag_(std::move(tag)),
        dim_(fiber_dim),
        h_(std::move(h)),
        dh_(std::move(dh)),
        params_(std::move(params)),
        x_independent_(x_independent) {
    require(fiber_dim >= 1, "electronic model: fiber dimension must be positive");
    require(static_cast<bool>(h_), "electronic model: empty evaluator");
  }

  const std::string& tag() const { return tag_; }
  int fiber_dim() const { return dim_; }
  const Params& params() const { return params_; }
  bool has_analytic_derivative() const { return static_cast<bool>(dh_); }
  bool x_independent() const { return x_independent_; }

  CMatrix operator()(double x) const {
    CMatrix h = h_(x);
    if (h.rows() != dim_ || h.cols() != dim_)
      throw numerical_error("electronic model '" + tag_ + "': evaluator returned wrong shape");
    return h;
  }

  // dH_e/dX, analytic when the model provides it, else a sixth-order
  // central difference with step `fd_step`.
  CMatrix derivative(double x, double fd_step = 1e-2) const {
    if (x_independent_) return CMatrix::Zero(dim_, dim_);
    if (dh_) return dh_(x);
    const double h = fd_step;
    return (-(*this)(x - 3 * h) + 9.0 * (*this)(x - 2 * h) - 45.0 * (*this)(x - h) +
            45.0 * (*this)(x + h) - 9.0 * (*this)(x + 2 * h) + (*this)(x + 3 * h)) /
           (60.0 * h);
  }

 private:
  std::string tag_;
  int dim_ = 1;
  Fiber h_;
  Fiber dh_;
  Params params_;
  bool x_independent_ = false;
};

inline CMatrix eval_He(const ElectronicModel& model, double x) {
  require(std::isfinite(x), "eval_He: X must be finite");
  return model(x);
}

namespace models {

inline double param(const ElectronicModel::Params& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

// Globally isolated complex two-band model:
//   H = [[f, g], [conj(g), -f]], f = tanh X, g = a + i b sech X.
// Gap 2 sqrt(f^2 + |g|^2).
inline ElectronicModel avoided_crossing(double a = 0.5, double b = 0.2) {
  auto h = [a, b](double x) {
    const double f = std::tanh(x);
    const Complex g(a, b / std::cosh(x));
    CMatrix m(2, 2);
    m << f, g, std::conj(g), -f;
    return m;
  };
  auto dh = [b](double x) {
    const double sech = 1.0 / std::cosh(x);
    const double df = sech * sech;
    const Complex dg(0.0, -b * sech * std::tanh(x));
    CMatrix m(2, 2);
    m << df, dg, std::conj(dg), -df;
    return m;
  };
  return ElectronicModel("avoided_crossing", 2, h, dh, {{"a", a}, {"b", b}});
}

namespace detail {
// exp(beta G) for the unit-axis rotation generator
// G = [[0,0,1],[0,0,1],[-1,-1,0]] / sqrt(2), via Rodrigues (G^3 = -G).
inline Eigen::Matrix3d x3_generator() {
  Eigen::Matrix3d g;
  g << 0, 0, 1, 0, 0, 1, -1, -1, 0;
  return g / std::sqrt(2.0);
}
inline Eigen::Matrix3d x3_rotation(double beta) {
  const Eigen::Matrix3d g = x3_generator();
  return Eigen::Matrix3d::Identity() + std::sin(beta) * g + (1.0 - std::cos(beta)) * g * g;
}
}  // namespace detail

// Three-level model: a crossing pair (X, -X) and a spectator 3 + 0.2 X^2,
// conjugated by the rotation exp(mu tanh(X) G) that mixes the pair with the
// spectator. Eigenvalues do not depend on mu; mu = 0 is the plain direct
// sum, for which P_* commutes with the full Hamiltonian.
inline ElectronicModel three_level(double mixing = 0.5, double offset = 3.0, double curvature = 0.2) {
  auto diag = [offset, curvature](double x) {
    return Eigen::Vector3d(x, -x, offset + curvature * x * x);
  };
  auto h = [mixing, diag](double x) {
    const Eigen::Matrix3d u = detail::x3_rotation(mixing * std::tanh(x));
    Eigen::Matrix3d m = u * diag(x).asDiagonal() * u.transpose();
    return CMatrix(m.cast<Complex>());
  };
  auto dh = [mixing, diag, curvature](double x) {
    const double beta = mixing * std::tanh(x);
    const double dbeta = mixing / (std::cosh(x) * std::cosh(x));
    const Eigen::Matrix3d u = detail::x3_rotation(beta);
    const Eigen::Matrix3d du = dbeta * detail::x3_generator() * u;
    const Eigen::Matrix3d d = diag(x).asDiagonal();
    const Eigen::Matrix3d dd = Eigen::Vector3d(1.0, -1.0, 2.0 * curvature * x).asDiagonal();
    Eigen::Matrix3d m = du * d * u.transpose() + u * dd * u.transpose() + u * d * du.transpose();
    return CMatrix(m.cast<Complex>());
  };
  return ElectronicModel("three_level", 3, h, dh,
                         {{"mixing", mixing}, {"offset", offset}, {"curvature", curvature}});
}

// Real two-band model R(theta) diag(X^2 - w, w - X^2) R(theta)^T with
// theta = twist * tanh X. Bands cross at X = +-sqrt(w).
inline ElectronicModel locally_isolated(double twist = 0.3, double well = 4.0) {
  auto h = [twist, well](double x) {
    const double th = twist * std::tanh(x);
    const double c = std::cos(th), s = std::sin(th);
    const double d1 = x * x - well, d2 = well - x * x;
    CMatrix m(2, 2);
    m << c * c * d1 + s * s * d2, c * s * (d1 - d2), c * s * (d1 - d2), s * s * d1 + c * c * d2;
    return m;
  };
  auto dh = [twist, well](double x) {
    const double th = twist * std::tanh(x);
    const double dth = twist / (std::cosh(x) * std::cosh(x));
    const double c = std::cos(th), s = std::sin(th);
    Eigen::Matrix2d r, dr, d, dd;
    r << c, -s, s, c;
    dr << -s, -c, c, -s;
    dr *= dth;
    d << x * x - well, 0, 0, well - x * x;
    dd << 2 * x, 0, 0, -2 * x;
    Eigen::Matrix2d m = dr * d * r.transpose() + r * dd * r.transpose() + r * d * dr.transpose();
    return CMatrix(m.cast<Complex>());
  };
  return ElectronicModel("locally_isolated", 2, h, dh, {{"twist", twist}, {"well", well}});
}

// X-independent diagonal fiber.
inline ElectronicModel constant(std::vector<double> levels) {
  require(!levels.empty(), "constant model: need at least one level");
  const int m = static_cast<int>(levels.size());
  CMatrix h = CMatrix::Zero(m, m);
  ElectronicModel::Params p;
  for (int a = 0; a < m; ++a) {
    h(a, a) = levels[static_cast<std::size_t>(a)];
    p["e" + std::to_string(a)] = levels[static_cast<std::size_t>(a)];
  }
  return ElectronicModel("constant", m, [h](double) { return h; }, nullptr, p, true);
}

// Scalar potential omega^2 X^2 / 2 (one-dimensional fiber).
inline ElectronicModel harmonic(double omega = 1.0) {
  auto h = [omega](double x) { return CMatrix::Constant(1, 1, 0.5 * omega * omega * x * x); };
  auto dh = [omega](double x) { return CMatrix::Constant(1, 1, omega * omega * x); };
  return ElectronicModel("harmonic", 1, h, dh, {{"omega", omega}});
}

inline std::vector<std::string> available_tags() {
  return {"avoided_crossing", "three_level", "locally_isolated", "constant", "harmonic"};
}

inline std::string describe(const std::string& tag) {
  if (tag == "avoided_crossing")
    return "2x2 complex, [[tanh X, a+ib sech X],[c.c., -tanh X]], globally isolated (a, b)";
  if (tag == "three_level")
    return "3x3 real, crossing pair X,-X plus spectator, mixed by exp(mu tanh X G) (mixing, offset, curvature)";
  if (tag == "locally_isolated")
    return "2x2 real, R(twist tanh X) diag(X^2-w, w-X^2) R^T, crossings at +-sqrt(w) (twist, well)";
  if (tag == "constant") return "X-independent diagonal (e0, e1, ...)";
  if (tag == "harmonic") return "1x1 scalar omega^2 X^2/2 (omega)";
  throw precondition_error("unknown model tag '" + tag + "'");
}

inline ElectronicModel from_tag(const std::string& tag, const ElectronicModel::Params& p = {}) {
  if (tag == "avoided_crossing") return avoided_crossing(param(p, "a", 0.5), param(p, "b", 0.2));
  if (tag == "three_level")
    return three_level(param(p, "mixing", 0.5), param(p, "offset", 3.0), param(p, "curvature", 0.2));
  if (tag == "locally_isolated") return locally_isolated(param(p, "twist", 0.3), param(p, "well", 4.0));
  if (tag == "harmonic") return harmonic(param(p, "omega", 1.0));
  if (tag == "constant") {
    std::vector<double> levels;
    for (int a = 0;; ++a) {
      auto it = p.find("e" + std::to_string(a));
      if (it == p.end()) break;
      levels.push_back(it->second);
    }
    if (levels.empty()) levels = {0.0};
    return constant(levels);
  }
  std::string known;
  for (const auto& t : available_tags()) known += (known.empty() ? "" : ", ") + t;
  throw precondition_error("unknown model tag '" + tag + "' (available: " + known + ")");
}

}  // namespace models
}  // namespace bornopp
