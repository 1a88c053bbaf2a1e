#include "rse/observer.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "rse/errors.hpp"

namespace rse {

namespace {

Matrix shift_matrix(int n) {
  Matrix A = Matrix::Zero(n, n);
  for (int k = 0; k + 1 < n; ++k) A(k, k + 1) = 1.0;
  return A;
}

// Observer right-hand side: canonical dynamics plus output-injection term.
Vector observer_rhs(const ObserverSpec& spec, const Vector& z, double y_i, double u) {
  const int n = spec.canonical.dim;
  Vector dz(n);
  for (int k = 0; k + 1 < n; ++k) dz[k] = z[k + 1];
  dz[n - 1] = spec.canonical.alpha(z);
  for (int k = 0; k < n; ++k) dz[k] += spec.canonical.betas[static_cast<std::size_t>(k)](z) * u;
  dz -= spec.gain * (z[0] - y_i);
  return dz;
}

}  // namespace

GainSynthesis synthesize_gain(int n, double theta) {
  if (n < 1) throw std::invalid_argument("synthesize_gain: n must be >= 1");
  if (!(theta > 0)) throw std::invalid_argument("synthesize_gain: theta must be positive");

  const Matrix A = shift_matrix(n);
  Matrix CtC = Matrix::Zero(n, n);
  CtC(0, 0) = 1.0;

  // Vectorize the symmetric unknowns: the map P -> theta P + A^T P + P A is
  // linear, solve L vec(P) = vec(C^T C) over the n(n+1)/2 upper triangle.
  const int m = n * (n + 1) / 2;
  std::vector<std::pair<int, int>> entries;
  entries.reserve(static_cast<std::size_t>(m));
  for (int r = 0; r < n; ++r)
    for (int c = r; c < n; ++c) entries.emplace_back(r, c);

  Matrix L = Matrix::Zero(m, m);
  Vector rhs(m);
  for (int row = 0; row < m; ++row) {
    const auto [r, c] = entries[static_cast<std::size_t>(row)];
    rhs[row] = CtC(r, c);
    for (int col = 0; col < m; ++col) {
      const auto [a, b] = entries[static_cast<std::size_t>(col)];
      Matrix E = Matrix::Zero(n, n);
      E(a, b) = 1.0;
      E(b, a) = 1.0;
      const Matrix op = theta * E + A.transpose() * E + E * A;
      L(row, col) = op(r, c);
    }
  }

  Eigen::FullPivLU<Matrix> lu(L);
  if (!lu.isInvertible()) throw NumericError("synthesize_gain: singular synthesis equation");
  const Vector pvec = lu.solve(rhs);

  GainSynthesis out;
  out.P = Matrix::Zero(n, n);
  for (int k = 0; k < m; ++k) {
    const auto [r, c] = entries[static_cast<std::size_t>(k)];
    out.P(r, c) = pvec[k];
    out.P(c, r) = pvec[k];
  }

  Eigen::LLT<Matrix> llt(out.P);
  if (llt.info() != Eigen::Success)
    throw NumericError("synthesize_gain: P is not positive definite");

  out.gain = llt.solve(Vector::Unit(n, 0));
  out.residual = (-theta * out.P - A.transpose() * out.P - out.P * A + CtC)
                     .cwiseAbs()
                     .maxCoeff();
  if (out.residual > 1e-9)
    throw NumericError("synthesize_gain: residual " + std::to_string(out.residual) +
                       " exceeds 1e-9");
  return out;
}

ObserverSpec ObserverSpec::make(int sensor, const CanonicalForm& canonical, double theta) {
  if (theta < 1.0) throw std::invalid_argument("ObserverSpec: theta must be >= 1");
  if (static_cast<int>(canonical.betas.size()) != canonical.dim)
    throw std::invalid_argument("ObserverSpec: betas must match the canonical dimension");
  ObserverSpec spec;
  spec.sensor = sensor;
  spec.canonical = canonical;
  spec.theta = theta;
  spec.gain = synthesize_gain(canonical.dim, theta).gain;
  return spec;
}

Vector observer_step(const ObserverSpec& spec, const Vector& z_hat, double y_i, double u,
                     double h) {
  if (!(h > 0)) throw std::invalid_argument("observer_step: step must be positive");
  auto field = [&](const Vector& z) -> Vector { return observer_rhs(spec, z, y_i, u); };
  return rk4_step(field, z_hat, h);
}

BankRun run_bank(const PlantModel& plant, const Trajectory& traj,
                 const std::vector<double>& thetas, const Vector& init_state) {
  if (static_cast<int>(thetas.size()) != plant.p)
    throw std::invalid_argument("run_bank: one theta per sensor required");
  if (traj.inputs.size() != traj.times.size())
    throw std::invalid_argument("run_bank: trajectory lacks recorded inputs");

  std::vector<ObserverSpec> specs;
  specs.reserve(static_cast<std::size_t>(plant.p));
  for (int i = 1; i <= plant.p; ++i) {
    specs.push_back(ObserverSpec::make(i, plant.canonical[static_cast<std::size_t>(i - 1)],
                                       thetas[static_cast<std::size_t>(i - 1)]));
  }

  // z_hat_i(0) = Phi_i(init_state), an element of Phi_i(X).
  const Vector phi0 = plant.phi.evaluate_raw(init_state);
  std::vector<Vector> z(static_cast<std::size_t>(plant.p));
  for (int i = 1; i <= plant.p; ++i)
    z[static_cast<std::size_t>(i - 1)] =
        phi0.segment(plant.layout.offset(i), plant.layout.size(i));

  BankRun run;
  run.layout = plant.layout;
  run.times = traj.times;
  run.z_hat.reserve(traj.times.size());

  const int samples = traj.samples();
  for (int k = 0; k < samples; ++k) {
    Vector stacked(plant.layout.total());
    for (int i = 1; i <= plant.p; ++i)
      stacked.segment(plant.layout.offset(i), plant.layout.size(i)) =
          z[static_cast<std::size_t>(i - 1)];
    run.z_hat.push_back(std::move(stacked));

    if (k + 1 == samples) break;
    const double u = traj.inputs[static_cast<std::size_t>(k)];
    const Vector& y = traj.outputs[static_cast<std::size_t>(k)];
    for (int i = 0; i < plant.p; ++i) {
      z[static_cast<std::size_t>(i)] = observer_step(specs[static_cast<std::size_t>(i)],
                                                     z[static_cast<std::size_t>(i)], y[i], u,
                                                     traj.step);
    }
  }
  return run;
}

std::vector<ErrorBoundProfile> calibrate_error_profiles(const PlantModel& plant,
                                                        const Trajectory& attack_free,
                                                        const BankRun& bank,
                                                        const std::vector<double>& thetas,
                                                        const Vector& floors) {
  std::vector<ErrorBoundProfile> profiles(static_cast<std::size_t>(plant.p));
  for (int i = 1; i <= plant.p; ++i) {
    ErrorBoundProfile& prof = profiles[static_cast<std::size_t>(i - 1)];
    prof.rate = thetas[static_cast<std::size_t>(i - 1)] / 8.0;
    prof.floor = floors[i - 1];
    double c = 0.0;
    for (int k = 0; k < attack_free.samples(); ++k) {
      const Vector phi = plant.phi.evaluate_raw(attack_free.states[static_cast<std::size_t>(k)]);
      const double err =
          (bank.z_hat[static_cast<std::size_t>(k)].segment(plant.layout.offset(i),
                                                           plant.layout.size(i)) -
           phi.segment(plant.layout.offset(i), plant.layout.size(i)))
              .lpNorm<Eigen::Infinity>();
      if (err > prof.floor) {
        const double t = attack_free.times[static_cast<std::size_t>(k)];
        c = std::max(c, err / std::exp(-prof.rate * t));
      }
    }
    prof.transient_coeff = c;
  }
  return profiles;
}

void export_bank_csv(const BankRun& bank, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("export_bank_csv: cannot open " + path);
  std::fprintf(f, "t");
  for (int i = 1; i <= bank.layout.block_count(); ++i)
    for (int k = 1; k <= bank.layout.size(i); ++k) std::fprintf(f, ",zhat_%d_%d", i, k);
  std::fprintf(f, "\n");
  for (std::size_t r = 0; r < bank.times.size(); ++r) {
    std::fprintf(f, "%.17g", bank.times[r]);
    for (int k = 0; k < bank.layout.total(); ++k) std::fprintf(f, ",%.17g", bank.z_hat[r][k]);
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

}  // namespace rse
