#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rse/compact_set.hpp"
#include "rse/signals.hpp"
#include "rse/types.hpp"
#include "rse/vector_map.hpp"

namespace rse {

/// Per-sensor uniformly observable canonical form
///   z_dot = (z_2, ..., z_{n_i}, alpha(z)) + (beta_1(z_1), ..., beta_{n_i}(z)) u,
/// with beta_k depending only on the first k canonical coordinates.
struct CanonicalForm {
  int dim = 1;
  std::function<double(const Vector&)> alpha;                 // top drift term
  std::vector<std::function<double(const Vector&)>> betas;    // triangular input gains
};

/// Input-affine plant x_dot = f(x) + g(x) u, y_i = h_i(x) + a_i + v_i, with the
/// per-sensor observability maps Phi_i stacked into `phi` and the canonical
/// observer forms declared by the scenario.
struct PlantModel {
  int n = 0;  // state dimension
  int p = 0;  // sensor count
  BlockLayout layout;  // (n_1, ..., n_p)

  std::function<Vector(const Vector&)> f;
  std::function<Vector(const Vector&)> g;
  std::vector<std::function<double(const Vector&)>> h;

  VectorMap phi;  // x -> col{Phi_i(x)}, out layout == layout
  std::vector<CanonicalForm> canonical;

  Vector output(const Vector& x) const {
    Vector y(p);
    for (int i = 0; i < p; ++i) y[i] = h[static_cast<std::size_t>(i)](x);
    return y;
  }
};

struct Trajectory {
  double step = 0.0;
  std::vector<double> times;
  std::vector<double> inputs;         // u(t_k), the value held over [t_k, t_{k+1})
  std::vector<Vector> states;         // x(t_k)
  std::vector<Vector> outputs;        // y(t_k) = clean + a + v
  std::vector<Vector> clean_outputs;  // h(x(t_k))
  std::vector<Vector> attack;         // a(t_k)
  std::vector<Vector> noise;          // v(t_k)

  int samples() const { return static_cast<int>(times.size()); }
};

/// One classical 4th-order Runge-Kutta step of an autonomous field (inputs
/// held constant over the step). Throws NumericError on non-finite results.
Vector rk4_step(const std::function<Vector(const Vector&)>& field, const Vector& x, double h);

struct GuardSpec {
  std::optional<CompactSetSpec> box;  // abort when the state leaves it
  static GuardSpec from_domain(const CompactSetSpec& domain, double factor = 10.0) {
    GuardSpec g;
    g.box = domain.scaled(factor);
    return g;
  }
};

/// Fixed-step simulation of the plant under input, attack and noise signals,
/// zero-order hold within each step. Deterministic given inputs and seed.
Trajectory simulate(const PlantModel& plant, const SignalSpec& input,
                    const std::vector<SignalSpec>& attack, const NoiseSpec& noise, double horizon,
                    double step, const GuardSpec& guard = {},
                    const std::optional<Vector>& x0 = std::nullopt);

/// Trajectory export: CSV `t, x_1..x_n, y_1..y_p, a_1..a_p`.
void export_trajectory_csv(const Trajectory& traj, const std::string& path);

}  // namespace rse
