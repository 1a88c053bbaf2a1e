#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "rse/compact_set.hpp"
#include "rse/types.hpp"
#include "rse/vector_map.hpp"

namespace rse {

class VectorMap;

/// Projected images {pi_I(Phi(x)) : x in X_Delta} together with their source
/// states, in grid insertion order.
struct ImageCloud {
  BlockLayout layout;                 // sub-layout of the projection
  std::vector<Vector> points;
  std::vector<Vector> states;
};

struct CloudQuery {
  double distance = 0.0;
  int index = -1;       // position of the minimizer in the cloud
  Vector argmin_state;  // its source state
};

/// Finite cover X_Delta of a compact set with covering radius Delta in the
/// inf norm. Construction: each axis of the bounding box is split into
/// ceil(width / (2*Delta)) equal cells and the lattice of cell centers is
/// taken, so every point of the set is within Delta of a grid point.
class SampleGrid {
 public:
  static SampleGrid build(const CompactSetSpec& spec, double delta,
                          std::int64_t max_points = 10'000'000);

  const CompactSetSpec& domain() const { return spec_; }
  double delta() const { return delta_; }
  const std::vector<Vector>& points() const { return points_; }
  int size() const { return static_cast<int>(points_.size()); }

  /// Image cloud of pi_I composed with `map` over the grid, cached by
  /// (map id, I). Repeated calls return the same object.
  std::shared_ptr<const ImageCloud> image_cloud(const VectorMap& map, const IndexSet& I) const;

 private:
  CompactSetSpec spec_ = CompactSetSpec::box(Vector::Zero(1), Vector::Ones(1));
  double delta_ = 0.0;
  std::vector<Vector> points_;

  mutable std::mutex cache_mutex_;
  mutable std::map<std::pair<std::string, std::vector<int>>, std::shared_ptr<const ImageCloud>>
      cache_;
};

/// Min inf-norm distance from z to the cloud, with the minimizing source
/// state. Exhaustive scan; ties broken by insertion order.
CloudQuery distance_to_cloud(const Vector& z, const ImageCloud& cloud);
CloudQuery distance_to_cloud(const PartitionedVector& z, const ImageCloud& cloud);

/// Largest ratio ||pi_I(map(x1)) - pi_I(map(x2))|| / ||x1 - x2|| over grid
/// pairs: a LOWER bound for the true Lipschitz constant L(Phi_I). When the
/// pair count exceeds `pair_cap` a deterministic seeded subsample of pairs is
/// used, a further lower-bound relaxation.
double estimate_lipschitz(const VectorMap& map, const IndexSet& I, const SampleGrid& grid,
                          std::int64_t pair_cap = 2'000'000);

/// CSV export with columns state_1..state_n, image_1..image_m.
void export_cloud_csv(const ImageCloud& cloud, const std::string& path);

}  // namespace rse
