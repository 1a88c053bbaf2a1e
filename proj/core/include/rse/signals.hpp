#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rse/types.hpp"

namespace rse {

/// Scalar time signal. `square` alternates +amplitude / -amplitude over half
/// periods once t >= start and is zero before; `table` is piecewise constant
/// (last value whose time is <= t).
class SignalSpec {
 public:
  enum class Kind { Zero, Constant, Square, Ramp, Table, Sine };

  SignalSpec() = default;

  static SignalSpec zero() { return SignalSpec{}; }

  static SignalSpec constant(double c) {
    SignalSpec s;
    s.kind_ = Kind::Constant;
    s.a_ = c;
    return s;
  }

  static SignalSpec square(double amplitude, double period, double start_time) {
    if (!(period > 0)) throw std::invalid_argument("SignalSpec::square: period must be positive");
    SignalSpec s;
    s.kind_ = Kind::Square;
    s.a_ = amplitude;
    s.b_ = period;
    s.c_ = start_time;
    return s;
  }

  static SignalSpec ramp(double slope, double start_time = 0.0) {
    SignalSpec s;
    s.kind_ = Kind::Ramp;
    s.a_ = slope;
    s.c_ = start_time;
    return s;
  }

  static SignalSpec sine(double amplitude, double angular_frequency, double phase = 0.0) {
    SignalSpec s;
    s.kind_ = Kind::Sine;
    s.a_ = amplitude;
    s.b_ = angular_frequency;
    s.c_ = phase;
    return s;
  }

  static SignalSpec table(std::vector<double> times, std::vector<double> values) {
    if (times.size() != values.size() || times.empty())
      throw std::invalid_argument("SignalSpec::table: times/values size mismatch");
    for (std::size_t k = 1; k < times.size(); ++k)
      if (!(times[k] > times[k - 1]))
        throw std::invalid_argument("SignalSpec::table: times must be strictly increasing");
    SignalSpec s;
    s.kind_ = Kind::Table;
    s.times_ = std::move(times);
    s.values_ = std::move(values);
    return s;
  }

  Kind kind() const { return kind_; }

  double value(double t) const {
    switch (kind_) {
      case Kind::Zero:
        return 0.0;
      case Kind::Constant:
        return a_;
      case Kind::Square: {
        if (t < c_) return 0.0;
        const double phase = std::fmod(t - c_, b_);
        return phase < 0.5 * b_ ? a_ : -a_;
      }
      case Kind::Ramp:
        return t < c_ ? 0.0 : a_ * (t - c_);
      case Kind::Sine:
        return a_ * std::sin(b_ * t + c_);
      case Kind::Table: {
        if (t < times_.front()) return 0.0;
        std::size_t k = 0;
        while (k + 1 < times_.size() && times_[k + 1] <= t) ++k;
        return values_[k];
      }
    }
    return 0.0;
  }

 private:
  Kind kind_ = Kind::Zero;
  double a_ = 0.0, b_ = 0.0, c_ = 0.0;
  std::vector<double> times_, values_;
};

/// Bounded measurement noise: per-channel uniform samples in [-bound, bound],
/// one draw per channel per step, reproducible from the seed.
struct NoiseSpec {
  Vector bound;        // v_bar >= 0 per channel
  std::uint64_t seed = 0;

  static NoiseSpec uniform_bound(int p, double v_bar, std::uint64_t seed) {
    NoiseSpec n;
    n.bound = Vector::Constant(p, v_bar);
    n.seed = seed;
    return n;
  }
};

}  // namespace rse
