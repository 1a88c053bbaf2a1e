#include "rse/plant.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "rse/errors.hpp"

namespace rse {

namespace {

// Uniform double in [-1, 1) from a raw 64-bit draw; fixed mapping so noise
// realizations are identical across platforms for a given seed.
double symmetric_unit(std::uint64_t raw) {
  const double u = static_cast<double>(raw >> 11) * 0x1.0p-53;  // [0, 1)
  return 2.0 * u - 1.0;
}

}  // namespace

Vector rk4_step(const std::function<Vector(const Vector&)>& field, const Vector& x, double h) {
  if (!(h > 0)) throw std::invalid_argument("rk4_step: step must be positive");
  const Vector k1 = field(x);
  const Vector k2 = field(x + 0.5 * h * k1);
  const Vector k3 = field(x + 0.5 * h * k2);
  const Vector k4 = field(x + h * k3);
  Vector out = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!out.allFinite()) throw NumericError("rk4_step: non-finite state");
  return out;
}

Trajectory simulate(const PlantModel& plant, const SignalSpec& input,
                    const std::vector<SignalSpec>& attack, const NoiseSpec& noise, double horizon,
                    double step, const GuardSpec& guard, const std::optional<Vector>& x0) {
  if (!(horizon > 0) || !(step > 0))
    throw std::invalid_argument("simulate: horizon and step must be positive");
  if (static_cast<int>(attack.size()) != plant.p)
    throw std::invalid_argument("simulate: attack spec must cover every sensor");
  if (noise.bound.size() != plant.p)
    throw std::invalid_argument("simulate: noise bound must cover every sensor");
  if (plant.n == 0) throw std::invalid_argument("simulate: plant has no state");

  const int steps = static_cast<int>(std::llround(horizon / step));
  std::mt19937_64 rng(noise.seed);

  Trajectory traj;
  traj.step = step;
  traj.times.reserve(static_cast<std::size_t>(steps) + 1);
  traj.states.reserve(static_cast<std::size_t>(steps) + 1);

  Vector x = x0.value_or(Vector::Zero(plant.n));
  if (x.size() != plant.n) throw std::invalid_argument("simulate: x0 dimension mismatch");

  for (int k = 0; k <= steps; ++k) {
    const double t = k * step;
    Vector a(plant.p), v(plant.p);
    for (int i = 0; i < plant.p; ++i) {
      a[i] = attack[static_cast<std::size_t>(i)].value(t);
      v[i] = noise.bound[i] * symmetric_unit(rng());
    }
    const Vector clean = plant.output(x);
    const double u = input.value(t);

    traj.times.push_back(t);
    traj.inputs.push_back(u);
    traj.states.push_back(x);
    traj.clean_outputs.push_back(clean);
    traj.attack.push_back(a);
    traj.noise.push_back(v);
    traj.outputs.push_back(clean + a + v);

    if (guard.box && !guard.box->contains(x)) {
      throw NumericError("simulate: state left the guard box at t=" + std::to_string(t));
    }
    if (k == steps) break;

    auto field = [&](const Vector& s) -> Vector { return plant.f(s) + plant.g(s) * u; };
    try {
      x = rk4_step(field, x, step);
    } catch (const NumericError&) {
      throw NumericError("simulate: integration blew up at t=" + std::to_string(t));
    }
  }
  return traj;
}

void export_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("export_trajectory_csv: cannot open " + path);
  const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states[0].size());
  const int p = traj.outputs.empty() ? 0 : static_cast<int>(traj.outputs[0].size());
  std::fprintf(f, "t");
  for (int k = 0; k < n; ++k) std::fprintf(f, ",x_%d", k + 1);
  for (int k = 0; k < p; ++k) std::fprintf(f, ",y_%d", k + 1);
  for (int k = 0; k < p; ++k) std::fprintf(f, ",a_%d", k + 1);
  std::fprintf(f, "\n");
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    std::fprintf(f, "%.17g", traj.times[r]);
    for (int k = 0; k < n; ++k) std::fprintf(f, ",%.17g", traj.states[r][k]);
    for (int k = 0; k < p; ++k) std::fprintf(f, ",%.17g", traj.outputs[r][k]);
    for (int k = 0; k < p; ++k) std::fprintf(f, ",%.17g", traj.attack[r][k]);
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

}  // namespace rse
