#pragma once

#include <vector>

#include "bornopp/core.hpp"

namespace bornopp {

// C-infinity ramp s(u) = b(u) / (b(u) + b(1-u)), b(u) = exp(-1/u) for u > 0.
// s = 0 for u <= 0, s = 1 for u >= 1, s(1/2) = 1/2, and every derivative
// vanishes at both ends.
inline double smooth_step(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / u);
  const double b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

// Mollified indicator of an open interval: 1 on the interval shrunk by
// `margin`, 0 outside the interval. Unbounded ends contribute a factor 1.
class IntervalIndicator {
 public:
  IntervalIndicator() = default;
  IntervalIndicator(Interval set, double margin) : set_(set), margin_(margin) {
    require(margin > 0.0, "smooth indicator: margin must be positive");
    require(!set.shrink(margin).empty(), "smooth indicator: empty core (interval minus margin)");
  }

  double operator()(double x) const {
    double v = 1.0;
    if (std::isfinite(set_.lo)) v *= smooth_step((x - set_.lo) / margin_);
    if (std::isfinite(set_.hi)) v *= smooth_step((set_.hi - x) / margin_);
    return v;
  }

  const Interval& set() const { return set_; }
  double margin() const { return margin_; }
  Interval core() const { return set_.shrink(margin_); }

 private:
  Interval set_;
  double margin_ = 1.0;
};

// Axis-aligned phase-space rectangle [q1,q2] x [p1,p2].
struct Rectangle {
  double q1 = 0, q2 = 0, p1 = 0, p2 = 0;

  bool contains(double q, double p) const { return q >= q1 && q <= q2 && p >= p1 && p <= p2; }
  Rectangle reflected_in_p() const { return {q1, q2, -p2, -p1}; }
};

// Finite union of pairwise disjoint rectangles with margin alpha.
class PhaseSpaceRegion {
 public:
  PhaseSpaceRegion() = default;
  PhaseSpaceRegion(std::vector<Rectangle> rects, double alpha)
      : rects_(std::move(rects)), alpha_(alpha) {
    require(!rects_.empty(), "phase-space region: no rectangles");
    require(alpha > 0.0, "phase-space region: margin alpha must be positive");
    for (const auto& r : rects_) {
      require(std::isfinite(r.q1) && std::isfinite(r.q2) && std::isfinite(r.p1) &&
                  std::isfinite(r.p2),
              "phase-space region: rectangles must be bounded");
      require(r.q2 - r.q1 > 2 * alpha && r.p2 - r.p1 > 2 * alpha,
              "phase-space region: empty core, a rectangle is thinner than 2*alpha");
    }
    for (std::size_t a = 0; a < rects_.size(); ++a)
      for (std::size_t b = a + 1; b < rects_.size(); ++b) {
        const auto& r = rects_[a];
        const auto& s = rects_[b];
        bool apart = r.q2 < s.q1 || s.q2 < r.q1 || r.p2 < s.p1 || s.p2 < r.p1;
        require(apart, "phase-space region: rectangles must be pairwise disjoint");
      }
  }

  const std::vector<Rectangle>& rectangles() const { return rects_; }
  double alpha() const { return alpha_; }

  bool contains(double q, double p) const {
    for (const auto& r : rects_)
      if (r.contains(q, p)) return true;
    return false;
  }

  // Hull of the position projection Gamma_q.
  Interval q_hull() const {
    Interval h{infinity, -infinity};
    for (const auto& r : rects_) {
      h.lo = std::min(h.lo, r.q1);
      h.hi = std::max(h.hi, r.q2);
    }
    return h;
  }

  Interval p_hull() const {
    Interval h{infinity, -infinity};
    for (const auto& r : rects_) {
      h.lo = std::min(h.lo, r.p1);
      h.hi = std::max(h.hi, r.p2);
    }
    return h;
  }

 private:
  std::vector<Rectangle> rects_;
  double alpha_ = 0.0;
};

// Approximate characteristic function of a region: 1 on Gamma - alpha,
// 0 outside Gamma, smooth in between. The union is combined as
// 1 - prod(1 - chi_r), exact on cores because rectangles are disjoint.
class SmoothIndicator {
 public:
  SmoothIndicator() = default;
  explicit SmoothIndicator(PhaseSpaceRegion region) : region_(std::move(region)) {}

  double operator()(double q, double p) const {
    const double a = region_.alpha();
    double outside = 1.0;
    for (const auto& r : region_.rectangles()) {
      double v = smooth_step((q - r.q1) / a) * smooth_step((r.q2 - q) / a) *
                 smooth_step((p - r.p1) / a) * smooth_step((r.p2 - p) / a);
      outside *= 1.0 - v;
    }
    return 1.0 - outside;
  }

  const PhaseSpaceRegion& region() const { return region_; }

 private:
  PhaseSpaceRegion region_;
};

inline SmoothIndicator smooth_indicator(const PhaseSpaceRegion& region) {
  return SmoothIndicator(region);
}

inline IntervalIndicator smooth_indicator(const Interval& set, double margin) {
  return IntervalIndicator(set, margin);
}

}  // namespace bornopp
