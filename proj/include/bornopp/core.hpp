#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace bornopp {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr Complex imag_unit{0.0, 1.0};
inline constexpr double infinity = std::numeric_limits<double>::infinity();

// Raised when an input violates a documented precondition.
struct precondition_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised when a numerical routine cannot honour its contract.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw precondition_error(what);
}

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const CMatrix& m) {
  return max_abs(m - m.adjoint());
}

// Open interval (lo, hi); infinite ends mean "unbounded".
struct Interval {
  double lo = -infinity;
  double hi = infinity;

  static Interval whole() { return {}; }

  bool contains(double x) const { return x > lo && x < hi; }
  bool empty() const { return !(hi > lo); }
  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
  double length() const { return hi - lo; }

  // The set of points at distance >= d from the complement.
  Interval shrink(double d) const { return {lo + d, hi - d}; }

  bool contains(const Interval& other) const {
    return other.lo >= lo && other.hi <= hi;
  }
};

}  // namespace bornopp
