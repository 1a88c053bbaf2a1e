#include "rse/identification.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

#include "rse/combinatorics.hpp"
#include "rse/errors.hpp"

namespace rse {

GroupProjection GroupProjection::identity(int dim) {
  GroupProjection t;
  t.apply = [](const Vector& z) { return z; };
  t.out_dim = dim;
  t.lipschitz = 1.0;
  return t;
}

GroupProjection GroupProjection::linear(const Matrix& T) {
  GroupProjection t;
  Matrix Tc = T;
  t.apply = [Tc](const Vector& z) -> Vector { return Tc * z; };
  t.out_dim = static_cast<int>(T.rows());
  t.lipschitz = T.cwiseAbs().rowwise().sum().maxCoeff();  // induced inf norm
  return t;
}

Vector SensorGroup::project_estimate(const BlockLayout& bank_layout, const Vector& z_hat) const {
  Vector out(psi.out_layout().total());
  int at = 0;
  for (int pos = 0; pos < sensors.size(); ++pos) {
    const int i = sensors.at(pos);
    const Vector zi = z_hat.segment(bank_layout.offset(i), bank_layout.size(i));
    const Vector xi = projections[static_cast<std::size_t>(pos)].apply(zi);
    out.segment(at, xi.size()) = xi;
    at += static_cast<int>(xi.size());
  }
  return out;
}

IndexSet SensorGroup::to_global(const IndexSet& local) const {
  std::vector<int> global;
  global.reserve(static_cast<std::size_t>(local.size()));
  for (int pos : local.indices()) global.push_back(sensors.at(pos - 1));
  return IndexSet(std::move(global));
}

std::vector<IndexSet> GroupPlan::group_index_sets() const {
  std::vector<IndexSet> out;
  out.reserve(groups.size());
  for (const auto& g : groups) out.push_back(g.sensors);
  return out;
}

double subspace_residual(const Vector& z, const Matrix& basis) {
  Eigen::ColPivHouseholderQR<Matrix> qr(basis);
  if (qr.rank() < basis.cols()) throw NumericError("subspace_residual: rank-deficient basis");
  const Vector coeffs = qr.solve(z);
  return (z - basis * coeffs).norm();
}

Inspector::Inspector(GroupPlan plan, InspectionConfig config)
    : plan_(std::move(plan)), config_(std::move(config)) {
  if (plan_.groups.empty()) throw std::invalid_argument("Inspector: empty group plan");
  if (config_.group_delta.size() != plan_.groups.size())
    throw std::invalid_argument("Inspector: one delta profile per group required");
  for (const auto& g : plan_.groups) {
    if (config_.q >= g.sensors.size())
      throw std::invalid_argument("Inspector: q must be smaller than every group");
  }
  if (config_.mode == InspectMode::Cloud && !config_.grid)
    throw std::invalid_argument("Inspector: cloud mode needs a sample grid");
  if (config_.mode == InspectMode::Subspace) {
    for (const auto& g : plan_.groups)
      if (!g.linear_basis)
        throw std::invalid_argument("Inspector: subspace mode needs linear bases on every group");
  }
}

double Inspector::lipschitz_estimate(int j, const IndexSet& I_local) const {
  const auto key = std::make_pair(j, I_local.indices());
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = lipschitz_cache_.find(key);
    if (it != lipschitz_cache_.end()) return it->second;
  }
  const double L = estimate_lipschitz(plan_.groups[static_cast<std::size_t>(j)].psi, I_local,
                                      *config_.grid);
  std::lock_guard<std::mutex> lock(mutex_);
  return lipschitz_cache_.emplace(key, L).first->second;
}

std::map<std::string, double> Inspector::lipschitz_report() const {
  std::lock_guard<std::mutex> lock(mutex_);
  std::map<std::string, double> out;
  for (const auto& [key, L] : lipschitz_cache_) {
    const auto& group = plan_.groups[static_cast<std::size_t>(key.first)];
    out["group" + std::to_string(key.first + 1) + ":" +
        group.to_global(IndexSet(key.second)).to_string()] = L;
  }
  return out;
}

InspectionOutcome Inspector::inspect(int j, const IndexSet& I_local, const Vector& xi_I,
                                     double t) const {
  const auto& group = plan_.groups[static_cast<std::size_t>(j)];
  const double delta_t = config_.group_delta[static_cast<std::size_t>(j)](t);

  InspectionOutcome outcome;
  outcome.group = j + 1;
  outcome.subset = group.to_global(I_local);

  if (config_.mode == InspectMode::Subspace) {
    const auto key = std::make_pair(j, I_local.indices());
    std::shared_ptr<const SubsetBasis> sb;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = qr_cache_.find(key);
      if (it != qr_cache_.end()) sb = it->second;
    }
    if (!sb) {
      const BlockLayout& layout = group.psi.out_layout();
      const Matrix& basis = *group.linear_basis;
      auto fresh = std::make_shared<SubsetBasis>();
      fresh->O.resize(sub_layout(layout, I_local).total(), basis.cols());
      int at = 0;
      for (int pos : I_local.indices()) {
        fresh->O.middleRows(at, layout.size(pos)) =
            basis.middleRows(layout.offset(pos), layout.size(pos));
        at += layout.size(pos);
      }
      fresh->qr.compute(fresh->O);
      if (fresh->qr.rank() < fresh->O.cols())
        throw NumericError("inspect: rank-deficient subset basis for group " +
                           std::to_string(j + 1));
      std::lock_guard<std::mutex> lock(mutex_);
      sb = qr_cache_.emplace(key, std::move(fresh)).first->second;
    }
    const Vector coeffs = sb->qr.solve(xi_I);
    outcome.distance = (xi_I - sb->O * coeffs).norm();
    outcome.threshold = delta_t * std::sqrt(static_cast<double>(xi_I.size()));
  } else {
    auto cloud = config_.grid->image_cloud(group.psi, I_local);
    outcome.distance = distance_to_cloud(xi_I, *cloud).distance;
    outcome.threshold = delta_t + lipschitz_estimate(j, I_local) * config_.grid->delta();
  }
  outcome.pass = outcome.distance <= outcome.threshold;
  return outcome;
}

namespace {

// First passing subset in lexicographic order. Parallel blocks inspect ahead
// speculatively; the result (subset and sequential scan count) is identical
// to the sequential scan.
GroupIdentification identify_group(const Inspector& inspector, int j, const Vector& xi_full,
                                   const BlockLayout& psi_layout, double t, int workers) {
  const auto& group = inspector.plan().groups[static_cast<std::size_t>(j)];
  const int m = group.sensors.size();
  const int take = m - inspector.config().q;

  GroupIdentification result;
  result.group = j + 1;

  CombinationStream stream(m, take);
  std::int64_t position = 0;

  if (workers <= 1) {
    while (auto I = stream.next()) {
      ++position;
      const Vector xi_I = project(psi_layout, xi_full, *I);
      const InspectionOutcome outcome = inspector.inspect(j, *I, xi_I, t);
      result.outcome = outcome;
      if (outcome.pass) {
        result.chosen = *I;
        result.subsets_scanned = position;
        return result;
      }
    }
    result.subsets_scanned = position;
    return result;
  }

  const int block = workers * 4;
  std::vector<IndexSet> batch;
  std::vector<InspectionOutcome> outcomes;
  while (true) {
    batch.clear();
    while (static_cast<int>(batch.size()) < block) {
      auto I = stream.next();
      if (!I) break;
      batch.push_back(std::move(*I));
    }
    if (batch.empty()) break;
    outcomes.assign(batch.size(), InspectionOutcome{});

    std::vector<std::thread> pool;
    std::atomic<std::size_t> cursor{0};
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (std::size_t k = cursor.fetch_add(1); k < batch.size(); k = cursor.fetch_add(1)) {
          const Vector xi_I = project(psi_layout, xi_full, batch[k]);
          outcomes[k] = inspector.inspect(j, batch[k], xi_I, t);
        }
      });
    }
    for (auto& th : pool) th.join();

    for (std::size_t k = 0; k < batch.size(); ++k) {
      ++position;
      result.outcome = outcomes[k];
      if (outcomes[k].pass) {
        result.chosen = batch[k];
        result.subsets_scanned = position;
        return result;
      }
    }
  }
  result.subsets_scanned = position;
  return result;
}

}  // namespace

std::vector<GroupIdentification> identify_once(const Vector& z_hat, const BlockLayout& layout,
                                               const Inspector& inspector, double t, int workers) {
  std::vector<GroupIdentification> out;
  out.reserve(inspector.plan().groups.size());
  for (std::size_t j = 0; j < inspector.plan().groups.size(); ++j) {
    const auto& group = inspector.plan().groups[j];
    const Vector xi_full = group.project_estimate(layout, z_hat);
    out.push_back(identify_group(inspector, static_cast<int>(j), xi_full, group.psi.out_layout(),
                                 t, workers));
  }
  return out;
}

std::string MonitorEvent::to_json() const {
  nlohmann::json j;
  j["t"] = t;
  j["group"] = group;
  switch (kind) {
    case Kind::Fail:
      j["event"] = "fail";
      break;
    case Kind::Switch:
      j["event"] = "switch";
      break;
    case Kind::Exhausted:
      j["event"] = "exhausted";
      break;
  }
  j["subset"] = subset.indices();
  j["distance"] = distance;
  j["threshold"] = threshold;
  j["subsets_scanned"] = subsets_scanned;
  return j.dump();
}

std::optional<double> MonitorResult::first_fail_time(int group_1based) const {
  for (const auto& e : events)
    if (e.group == group_1based && e.kind == MonitorEvent::Kind::Fail) return e.t;
  return std::nullopt;
}

std::optional<double> MonitorResult::first_switch_time(int group_1based) const {
  for (const auto& e : events)
    if (e.group == group_1based && e.kind == MonitorEvent::Kind::Switch) return e.t;
  return std::nullopt;
}

int MonitorResult::switch_count(int group_1based) const {
  int count = 0;
  for (const auto& e : events)
    if (e.group == group_1based && e.kind == MonitorEvent::Kind::Switch) ++count;
  return count;
}

MonitorResult monitor_run(const BankRun& bank, const Inspector& inspector, int workers) {
  const auto& plan = inspector.plan();
  const std::size_t n_groups = plan.groups.size();
  const int samples = static_cast<int>(bank.times.size());

  MonitorResult result;
  result.times = bank.times;
  result.chosen_local.resize(static_cast<std::size_t>(samples));
  result.identified.resize(static_cast<std::size_t>(samples));
  result.distance.resize(static_cast<std::size_t>(samples));
  result.threshold.resize(static_cast<std::size_t>(samples));
  result.scanned_per_sample.assign(static_cast<std::size_t>(samples), 0);
  result.flagged.assign(static_cast<std::size_t>(samples), false);

  // initial policy state: first lexicographic subset per group
  std::vector<IndexSet> current(n_groups);
  for (std::size_t j = 0; j < n_groups; ++j) {
    const int m = plan.groups[j].sensors.size();
    CombinationStream stream(m, m - inspector.config().q);
    current[j] = *stream.next();
  }

  for (int k = 0; k < samples; ++k) {
    const double t = bank.times[static_cast<std::size_t>(k)];
    const Vector& z_hat = bank.z_hat[static_cast<std::size_t>(k)];
    auto& chosen_row = result.chosen_local[static_cast<std::size_t>(k)];
    auto& xi_row = result.identified[static_cast<std::size_t>(k)];
    auto& dist_row = result.distance[static_cast<std::size_t>(k)];
    auto& thr_row = result.threshold[static_cast<std::size_t>(k)];
    chosen_row.resize(n_groups);
    xi_row.resize(n_groups);
    dist_row.resize(n_groups, 0.0);
    thr_row.resize(n_groups, 0.0);

    std::int64_t scanned = 0;
    for (std::size_t j = 0; j < n_groups; ++j) {
      const auto& group = plan.groups[j];
      const Vector xi_full = group.project_estimate(bank.layout, z_hat);
      Vector xi_I = project(group.psi.out_layout(), xi_full, current[j]);
      InspectionOutcome outcome = inspector.inspect(static_cast<int>(j), current[j], xi_I, t);
      ++scanned;

      if (!outcome.pass) {
        MonitorEvent fail;
        fail.t = t;
        fail.group = static_cast<int>(j) + 1;
        fail.kind = MonitorEvent::Kind::Fail;
        fail.subset = outcome.subset;
        fail.distance = outcome.distance;
        fail.threshold = outcome.threshold;
        fail.subsets_scanned = 1;
        result.events.push_back(fail);

        GroupIdentification ident = identify_group(inspector, static_cast<int>(j), xi_full,
                                                   group.psi.out_layout(), t, workers);
        scanned += ident.subsets_scanned;
        if (ident.chosen) {
          current[j] = *ident.chosen;
          xi_I = project(group.psi.out_layout(), xi_full, current[j]);
          outcome = ident.outcome;

          MonitorEvent sw;
          sw.t = t;
          sw.group = static_cast<int>(j) + 1;
          sw.kind = MonitorEvent::Kind::Switch;
          sw.subset = outcome.subset;
          sw.distance = outcome.distance;
          sw.threshold = outcome.threshold;
          sw.subsets_scanned = ident.subsets_scanned;
          result.events.push_back(sw);
        } else {
          // threshold model violated: hold the last good subset, flag sample
          result.flagged[static_cast<std::size_t>(k)] = true;
          result.any_exhausted = true;
          xi_I = project(group.psi.out_layout(), xi_full, current[j]);

          MonitorEvent ex;
          ex.t = t;
          ex.group = static_cast<int>(j) + 1;
          ex.kind = MonitorEvent::Kind::Exhausted;
          ex.subset = group.to_global(current[j]);
          ex.distance = ident.outcome.distance;
          ex.threshold = ident.outcome.threshold;
          ex.subsets_scanned = ident.subsets_scanned;
          result.events.push_back(ex);
        }
      }

      chosen_row[j] = current[j];
      xi_row[j] = std::move(xi_I);
      dist_row[j] = outcome.distance;
      thr_row[j] = outcome.threshold;
    }
    result.scanned_per_sample[static_cast<std::size_t>(k)] = scanned;
    if (scanned > result.max_epoch_scanned) result.max_epoch_scanned = scanned;
  }
  return result;
}

int worker_count_from_env() {
  const char* env = std::getenv("RSE_THREADS");
  if (!env) return 1;
  const int parsed = std::atoi(env);
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(parsed, 1, std::max(1, hw));
}

}  // namespace rse
