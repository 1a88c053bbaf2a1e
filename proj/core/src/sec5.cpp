#include "rse/sec5.hpp"

#include <cmath>

#include "rse/errors.hpp"

namespace rse {

namespace {
constexpr int kSensors = 20;
}

Sec5Scenario builtin_scenario_sec5(double attack_amplitude) {
  Sec5Scenario sc;
  sc.attack_amplitude = attack_amplitude;

  PlantModel& plant = sc.plant;
  plant.n = 3;
  plant.p = kSensors;
  plant.layout = BlockLayout::uniform(kSensors, 1);

  plant.f = [](const Vector& x) -> Vector {
    Vector dx(3);
    dx[0] = -x[0] + 0.5 * x[2] * x[2] - x[1] * x[2] * std::cos(x[1]);
    dx[1] = -x[1];
    dx[2] = -x[1] * std::cos(x[1]);
    return dx;
  };
  plant.g = [](const Vector& x) -> Vector {
    Vector gx(3);
    gx[0] = x[2] + x[2] * std::cos(x[1]);
    gx[1] = 1.0;
    gx[2] = 1.0 + std::cos(x[1]);
    return gx;
  };

  plant.h.resize(kSensors);
  for (int i = 1; i <= 10; ++i) {
    plant.h[static_cast<std::size_t>(i - 1)] = [i](const Vector& x) {
      return x[0] - 0.5 * x[2] * x[2] + (i / 10.0) * x[1];
    };
  }
  for (int i = 11; i <= 20; ++i) {
    plant.h[static_cast<std::size_t>(i - 1)] = [](const Vector& x) {
      return 0.5 * x[2] - 0.5 * std::sin(x[1]);
    };
  }

  // n_i = 1 for every sensor, so Phi_i = h_i and the stacked map is h itself.
  auto h_copy = plant.h;
  plant.phi = VectorMap(
      "sec5_phi", 3, plant.layout,
      [h_copy](const Vector& x) -> Vector {
        Vector out(kSensors);
        for (int i = 0; i < kSensors; ++i) out[i] = h_copy[static_cast<std::size_t>(i)](x);
        return out;
      },
      [](const Vector& x) -> Matrix {
        Matrix J(kSensors, 3);
        for (int i = 1; i <= 10; ++i) {
          J.row(i - 1) << 1.0, i / 10.0, -x[2];
        }
        for (int i = 11; i <= 20; ++i) {
          J.row(i - 1) << 0.0, -0.5 * std::cos(x[1]), 0.5;
        }
        return J;
      });

  plant.canonical.resize(kSensors);
  for (int i = 1; i <= 10; ++i) {
    CanonicalForm& cf = plant.canonical[static_cast<std::size_t>(i - 1)];
    cf.dim = 1;
    cf.alpha = [](const Vector& z) { return -z[0]; };
    cf.betas = {[i](const Vector&) { return i / 10.0; }};
  }
  for (int i = 11; i <= 20; ++i) {
    CanonicalForm& cf = plant.canonical[static_cast<std::size_t>(i - 1)];
    cf.dim = 1;
    cf.alpha = [](const Vector&) { return 0.0; };
    cf.betas = {[](const Vector&) { return 0.5; }};
  }

  sc.domain = CompactSetSpec::ball(Vector::Zero(3), 0.5);
  sc.input = SignalSpec::sine(0.25, 0.2 * M_PI);

  sc.attack.assign(kSensors, SignalSpec::zero());
  for (int i = 0; i < 4; ++i) {
    sc.attack[static_cast<std::size_t>(i)] =
        SignalSpec::square(attack_amplitude, sc.attack_period, sc.attack_start);
  }

  sc.groups = {IndexSet{1, 2, 3, 4, 5, 6, 7, 8, 9, 10},
               IndexSet{11, 12, 13, 14, 15, 16, 17, 18, 19, 20}};
  return sc;
}

namespace {

Matrix sec5_s_rows(const IndexSet& sensors) {
  Matrix B = Matrix::Zero(sensors.size(), 3);
  for (int r = 0; r < sensors.size(); ++r) {
    const int i = sensors.at(r);
    if (i <= 10) {
      B(r, 0) = 1.0;
      B(r, 1) = i / 10.0;
    } else {
      B(r, 2) = 1.0;
    }
  }
  return B;
}

}  // namespace

Matrix sec5_group_basis(const IndexSet& sensors) {
  const Matrix full = sec5_s_rows(sensors);
  std::vector<int> cols;
  for (int c = 0; c < 3; ++c)
    if (full.col(c).cwiseAbs().maxCoeff() > 0.0) cols.push_back(c);
  Matrix B(sensors.size(), static_cast<int>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) B.col(static_cast<int>(k)) = full.col(cols[k]);
  return B;
}

Vector sec5_analytic_inverse(const std::vector<std::pair<IndexSet, Vector>>& identified) {
  int rows = 0;
  for (const auto& [ids, xi] : identified) rows += ids.size();
  Matrix O(rows, 3);
  Vector rhs(rows);
  int at = 0;
  for (const auto& [ids, xi] : identified) {
    O.middleRows(at, ids.size()) = sec5_s_rows(ids);
    rhs.segment(at, ids.size()) = xi;
    at += ids.size();
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(O);
  if (qr.rank() < 3)
    throw NumericError(
        "sec5_analytic_inverse: identified sensors do not determine the state (rank < 3)");
  const Vector s = qr.solve(rhs);
  Vector x(3);
  x[1] = s[1];
  x[2] = 2.0 * s[2] + std::sin(x[1]);
  x[0] = s[0] + 0.5 * x[2] * x[2];
  return x;
}

}  // namespace rse
