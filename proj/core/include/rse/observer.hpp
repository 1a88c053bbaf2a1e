#pragma once

#include <vector>

#include "rse/plant.hpp"
#include "rse/types.hpp"

namespace rse {

/// Solution of the high-gain synthesis equation
///   0 = -theta P - A^T P - P A + C^T C
/// with A the n x n upper shift matrix and C = e_1^T, plus the observer gain
/// P^{-1} C^T. P is checked positive definite; residual stays below 1e-9.
struct GainSynthesis {
  Matrix P;
  Vector gain;
  double residual = 0.0;
};

GainSynthesis synthesize_gain(int n, double theta);

/// One configured per-sensor observer.
struct ObserverSpec {
  int sensor = 1;           // 1-based
  CanonicalForm canonical;  // alpha and triangular betas
  double theta = 1.0;
  Vector gain;              // P^{-1} C^T

  static ObserverSpec make(int sensor, const CanonicalForm& canonical, double theta);
};

/// One RK4 step of the observer dynamics with measurement and input held
/// constant over the step.
Vector observer_step(const ObserverSpec& spec, const Vector& z_hat, double y_i, double u,
                     double h);

/// delta_i(t) = max(c * exp(-rate t), floor): exponential transient envelope
/// with a noise floor. Non-increasing in t.
struct ErrorBoundProfile {
  double transient_coeff = 0.0;  // c
  double rate = 0.0;             // theta / 8
  double floor = 0.0;            // epsilon

  double operator()(double t) const {
    return std::max(transient_coeff * std::exp(-rate * t), floor);
  }
};

struct BankRun {
  BlockLayout layout;            // (n_1, ..., n_p)
  std::vector<double> times;
  std::vector<Vector> z_hat;     // stacked estimates per sample
};

/// Runs the full observer bank along a simulated trajectory. Observers are
/// initialized at Phi_i(x_init) (default: the domain center), which places
/// z_hat_i(0) inside Phi_i(X) by construction.
BankRun run_bank(const PlantModel& plant, const Trajectory& traj,
                 const std::vector<double>& thetas, const Vector& init_state);

/// Fits per-sensor transient coefficients from an attack-free run:
/// c_i = sup over samples with err > floor of err_i(t) / exp(-theta_i t / 8).
/// Returns profiles with the given floors (typically the noise bounds).
std::vector<ErrorBoundProfile> calibrate_error_profiles(const PlantModel& plant,
                                                        const Trajectory& attack_free,
                                                        const BankRun& bank,
                                                        const std::vector<double>& thetas,
                                                        const Vector& floors);

/// Estimate export: CSV `t, zhat_1_1..zhat_p_{n_p}`.
void export_bank_csv(const BankRun& bank, const std::string& path);

}  // namespace rse
