#include "rse/sample_grid.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "rse/errors.hpp"

namespace rse {

SampleGrid SampleGrid::build(const CompactSetSpec& spec, double delta, std::int64_t max_points) {
  if (!(delta > 0)) throw std::invalid_argument("SampleGrid: delta must be positive");
  const int n = spec.dim();

  std::vector<int> counts(static_cast<std::size_t>(n));
  std::int64_t total = 1;
  for (int k = 0; k < n; ++k) {
    const double width = spec.hi()[k] - spec.lo()[k];
    const int m = std::max(1, static_cast<int>(std::ceil(width / (2.0 * delta))));
    counts[static_cast<std::size_t>(k)] = m;
    total *= m;
    if (total > max_points)
      throw NumericError("SampleGrid: point count exceeds cap (" + std::to_string(max_points) +
                         "); delta too small for this set");
  }

  SampleGrid grid;
  grid.spec_ = spec;
  grid.delta_ = delta;
  grid.points_.reserve(static_cast<std::size_t>(total));

  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  Vector x(n);
  bool carry = false;
  while (!carry) {
    for (int k = 0; k < n; ++k) {
      const double width = spec.hi()[k] - spec.lo()[k];
      const double cell = width / counts[static_cast<std::size_t>(k)];
      x[k] = spec.lo()[k] + (idx[static_cast<std::size_t>(k)] + 0.5) * cell;
    }
    if (spec.contains(x)) grid.points_.push_back(x);
    // odometer increment
    carry = true;
    for (int k = 0; k < n && carry; ++k) {
      if (++idx[static_cast<std::size_t>(k)] < counts[static_cast<std::size_t>(k)]) {
        carry = false;
      } else {
        idx[static_cast<std::size_t>(k)] = 0;
      }
    }
  }

  if (spec.kind() == CompactSetSpec::Kind::Ball) {
    // center joins the grid unless a lattice point already sits there
    const Vector c = spec.center();
    bool present = false;
    for (const auto& p : grid.points_) {
      if ((p - c).lpNorm<Eigen::Infinity>() == 0.0) {
        present = true;
        break;
      }
    }
    if (!present) grid.points_.push_back(c);
  }

  return grid;
}

std::shared_ptr<const ImageCloud> SampleGrid::image_cloud(const VectorMap& map,
                                                          const IndexSet& I) const {
  const auto key = std::make_pair(map.id(), I.indices());
  {
    std::lock_guard<std::mutex> lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }

  auto cloud = std::make_shared<ImageCloud>();
  cloud->layout = sub_layout(map.out_layout(), I);
  cloud->points.reserve(points_.size());
  cloud->states = points_;
  for (const auto& x : points_) {
    Vector full = map.evaluate_raw(x);
    cloud->points.push_back(project(map.out_layout(), full, I));
  }

  std::lock_guard<std::mutex> lock(cache_mutex_);
  auto [it, inserted] = cache_.emplace(key, std::move(cloud));
  return it->second;
}

CloudQuery distance_to_cloud(const Vector& z, const ImageCloud& cloud) {
  if (cloud.points.empty()) throw std::invalid_argument("distance_to_cloud: empty cloud");
  if (z.size() != cloud.layout.total())
    throw std::invalid_argument("distance_to_cloud: layout mismatch");
  CloudQuery best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cloud.points.size(); ++k) {
    const double d = (z - cloud.points[k]).lpNorm<Eigen::Infinity>();
    if (d < best.distance) {
      best.distance = d;
      best.index = static_cast<int>(k);
    }
  }
  best.argmin_state = cloud.states[static_cast<std::size_t>(best.index)];
  return best;
}

CloudQuery distance_to_cloud(const PartitionedVector& z, const ImageCloud& cloud) {
  if (z.layout() != cloud.layout)
    throw std::invalid_argument("distance_to_cloud: layout mismatch");
  return distance_to_cloud(z.data(), cloud);
}

double estimate_lipschitz(const VectorMap& map, const IndexSet& I, const SampleGrid& grid,
                          std::int64_t pair_cap) {
  const auto n = static_cast<std::int64_t>(grid.size());
  if (n < 2) throw std::invalid_argument("estimate_lipschitz: need at least 2 grid points");

  auto cloud = grid.image_cloud(map, I);
  const auto& pts = cloud->points;
  const auto& states = cloud->states;

  double best = 0.0;
  auto consider = [&](std::int64_t a, std::int64_t b) {
    const double dx = (states[static_cast<std::size_t>(a)] - states[static_cast<std::size_t>(b)])
                          .lpNorm<Eigen::Infinity>();
    if (dx == 0.0) return;
    const double dy = (pts[static_cast<std::size_t>(a)] - pts[static_cast<std::size_t>(b)])
                          .lpNorm<Eigen::Infinity>();
    const double ratio = dy / dx;
    if (ratio > best) best = ratio;
  };

  const std::int64_t total_pairs = n * (n - 1) / 2;
  if (total_pairs <= pair_cap) {
    for (std::int64_t a = 0; a < n; ++a)
      for (std::int64_t b = a + 1; b < n; ++b) consider(a, b);
  } else {
    std::mt19937_64 rng(0x5eedc0de);  // fixed: deterministic subsample
    std::uniform_int_distribution<std::int64_t> pick(0, n - 1);
    for (std::int64_t k = 0; k < pair_cap; ++k) {
      const std::int64_t a = pick(rng);
      const std::int64_t b = pick(rng);
      if (a != b) consider(a, b);
    }
  }
  return best;
}

void export_cloud_csv(const ImageCloud& cloud, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("export_cloud_csv: cannot open " + path);
  const int n = cloud.states.empty() ? 0 : static_cast<int>(cloud.states[0].size());
  const int m = cloud.layout.total();
  for (int k = 0; k < n; ++k) std::fprintf(f, "%sstate_%d", k ? "," : "", k + 1);
  for (int k = 0; k < m; ++k) std::fprintf(f, ",image_%d", k + 1);
  std::fprintf(f, "\n");
  for (std::size_t r = 0; r < cloud.points.size(); ++r) {
    for (int k = 0; k < n; ++k) std::fprintf(f, "%s%.17g", k ? "," : "", cloud.states[r][k]);
    for (int k = 0; k < m; ++k) std::fprintf(f, ",%.17g", cloud.points[r][k]);
    std::fprintf(f, "\n");
  }
  std::fclose(f);
}

}  // namespace rse
