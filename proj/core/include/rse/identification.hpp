#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "rse/observer.hpp"
#include "rse/sample_grid.hpp"
#include "rse/types.hpp"
#include "rse/vector_map.hpp"

namespace rse {

enum class InspectMode { Cloud, Subspace };

/// Lipschitz projection T_i^j applied to one sensor estimate z_hat_i.
struct GroupProjection {
  std::function<Vector(const Vector&)> apply;
  int out_dim = 1;
  double lipschitz = 1.0;

  static GroupProjection identity(int dim);
  static GroupProjection linear(const Matrix& T);
};

/// One local group: sensors P_j, per-sensor projections, and the projected
/// map Psi^j(x) = col{T_i^j(Phi_i(x))}. When the image of Psi^j is known to
/// lie in a linear subspace, `linear_basis` holds a matrix whose column space
/// contains it (row blocks aligned with psi's layout), enabling the
/// pseudo-inverse residual test.
struct SensorGroup {
  IndexSet sensors;
  std::vector<GroupProjection> projections;  // aligned with sensors
  VectorMap psi;
  std::optional<Matrix> linear_basis;

  /// xi_hat^j: projected group estimate from the stacked bank estimate.
  Vector project_estimate(const BlockLayout& bank_layout, const Vector& z_hat) const;

  /// Local positions {1..|P_j|} mapped to global sensor ids.
  IndexSet to_global(const IndexSet& local) const;
};

struct GroupPlan {
  int p = 0;
  std::vector<SensorGroup> groups;

  std::vector<IndexSet> group_index_sets() const;
};

struct InspectionConfig {
  int q = 0;
  InspectMode mode = InspectMode::Cloud;
  std::shared_ptr<const SampleGrid> grid;                    // required in cloud mode
  std::vector<std::function<double(double)>> group_delta;    // delta^j(t), one per group
};

struct InspectionOutcome {
  int group = 0;       // 1-based j
  IndexSet subset;     // global sensor ids
  double distance = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Euclidean residual ||(I - O O_dagger) z||_2 computed through least squares.
/// Throws NumericError when the basis is rank deficient.
double subspace_residual(const Vector& z, const Matrix& basis);

/// Shared inspection context: caches per-subset Lipschitz estimates (cloud
/// mode) and basis factorizations (subspace mode). Thread-safe; inspections
/// are pure.
class Inspector {
 public:
  Inspector(GroupPlan plan, InspectionConfig config);

  const GroupPlan& plan() const { return plan_; }
  const InspectionConfig& config() const { return config_; }

  /// Inspect the subset I (local positions within group j, 0-based j) against
  /// the group's image set at time t. Cloud mode: distance to the sampled
  /// image cloud vs delta^j(t) + L(Psi_I) Delta. Subspace mode: pseudo-inverse
  /// residual vs delta^j(t) * sqrt(dim).
  InspectionOutcome inspect(int j, const IndexSet& I_local, const Vector& xi_I, double t) const;

  double lipschitz_estimate(int j, const IndexSet& I_local) const;

  /// All (group, subset) Lipschitz estimates touched so far, for reporting.
  std::map<std::string, double> lipschitz_report() const;

 private:
  GroupPlan plan_;
  InspectionConfig config_;

  struct SubsetBasis {
    Matrix O;
    Eigen::ColPivHouseholderQR<Matrix> qr;
  };

  mutable std::mutex mutex_;
  mutable std::map<std::pair<int, std::vector<int>>, double> lipschitz_cache_;
  mutable std::map<std::pair<int, std::vector<int>>, std::shared_ptr<const SubsetBasis>> qr_cache_;
};

struct GroupIdentification {
  int group = 0;                       // 1-based j
  std::optional<IndexSet> chosen;      // local positions; nullopt when exhausted
  InspectionOutcome outcome;           // of the chosen subset (or the last failure)
  std::int64_t subsets_scanned = 0;
};

/// Scans subsets of size |P_j| - q in lexicographic order for every group and
/// returns the first passing subset per group; exhaustion is reported, not
/// fatal. `workers` > 1 inspects candidate blocks concurrently while keeping
/// the selected subset and the scan count identical to the sequential scan.
std::vector<GroupIdentification> identify_once(const Vector& z_hat, const BlockLayout& layout,
                                               const Inspector& inspector, double t,
                                               int workers = 1);

struct MonitorEvent {
  enum class Kind { Fail, Switch, Exhausted };
  double t = 0.0;
  int group = 0;  // 1-based
  Kind kind = Kind::Fail;
  IndexSet subset;  // global ids: failing subset / newly adopted subset
  double distance = 0.0;
  double threshold = 0.0;
  std::int64_t subsets_scanned = 0;

  std::string to_json() const;
};

struct MonitorResult {
  std::vector<double> times;
  std::vector<MonitorEvent> events;

  // per sample, per group (group-major inner vectors)
  std::vector<std::vector<IndexSet>> chosen_local;
  std::vector<std::vector<Vector>> identified;   // xi_hat_{I_j}(t)
  std::vector<std::vector<double>> distance;
  std::vector<std::vector<double>> threshold;
  std::vector<std::int64_t> scanned_per_sample;
  std::vector<bool> flagged;  // exhaustion at this sample

  std::int64_t max_epoch_scanned = 0;
  bool any_exhausted = false;

  std::optional<double> first_fail_time(int group_1based) const;
  std::optional<double> first_switch_time(int group_1based) const;
  int switch_count(int group_1based) const;
};

/// Online switching monitor: starts every group at its first lexicographic
/// subset, keeps the current subset while it passes, re-identifies on failure
/// and holds the last good subset (flagging the sample) when no subset passes.
MonitorResult monitor_run(const BankRun& bank, const Inspector& inspector, int workers = 1);

/// RSE_THREADS, clamped to [1, hardware_concurrency]; 1 when unset.
int worker_count_from_env();

}  // namespace rse
