#pragma once

#include <stdexcept>

#include "rse/types.hpp"

namespace rse {

/// Compact state set X: an axis-aligned box or an inf-norm ball
/// (which is itself a box, but keeps the scenario's phrasing).
class CompactSetSpec {
 public:
  enum class Kind { Box, Ball };

  static CompactSetSpec box(Vector lo, Vector hi) {
    if (lo.size() != hi.size() || lo.size() == 0)
      throw std::invalid_argument("CompactSetSpec: lo/hi size mismatch");
    for (int k = 0; k < lo.size(); ++k)
      if (!(lo[k] < hi[k])) throw std::invalid_argument("CompactSetSpec: need lo < hi per axis");
    CompactSetSpec s;
    s.kind_ = Kind::Box;
    s.lo_ = std::move(lo);
    s.hi_ = std::move(hi);
    return s;
  }

  static CompactSetSpec ball(Vector center, double radius) {
    if (center.size() == 0) throw std::invalid_argument("CompactSetSpec: empty center");
    if (!(radius > 0)) throw std::invalid_argument("CompactSetSpec: radius must be positive");
    CompactSetSpec s;
    s.kind_ = Kind::Ball;
    s.lo_ = center.array() - radius;
    s.hi_ = center.array() + radius;
    s.center_ = std::move(center);
    s.radius_ = radius;
    return s;
  }

  Kind kind() const { return kind_; }
  int dim() const { return static_cast<int>(lo_.size()); }
  const Vector& lo() const { return lo_; }
  const Vector& hi() const { return hi_; }
  double radius() const { return radius_; }

  Vector center() const {
    if (kind_ == Kind::Ball) return center_;
    return 0.5 * (lo_ + hi_);
  }

  bool contains(const Vector& x, double slack = 0.0) const {
    if (x.size() != lo_.size()) return false;
    for (int k = 0; k < x.size(); ++k)
      if (x[k] < lo_[k] - slack || x[k] > hi_[k] + slack) return false;
    return true;
  }

  /// Same set scaled by `factor` about its center; used for guard boxes.
  CompactSetSpec scaled(double factor) const {
    Vector c = center();
    if (kind_ == Kind::Ball) return ball(c, radius_ * factor);
    return box(c + factor * (lo_ - c), c + factor * (hi_ - c));
  }

 private:
  Kind kind_ = Kind::Box;
  Vector lo_, hi_;
  Vector center_;
  double radius_ = 0.0;
};

}  // namespace rse
