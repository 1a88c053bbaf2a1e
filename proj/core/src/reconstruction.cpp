#include "rse/reconstruction.hpp"

#include <cmath>
#include <stdexcept>

#include "rse/errors.hpp"

namespace rse {

namespace {

struct ConsistencyScan {
  double implied_L = 0.0;  // max ||dw|| / ||dz|| over anchor pairs
  double worst_violation = 0.0;
  std::size_t worst_a = 0, worst_b = 0;
  bool duplicate_conflict = false;
};

ConsistencyScan scan_anchors(const std::vector<Vector>& in, const std::vector<Vector>& out,
                             double L, double slack) {
  ConsistencyScan s;
  for (std::size_t a = 0; a < in.size(); ++a) {
    for (std::size_t b = a + 1; b < in.size(); ++b) {
      const double dz = (in[a] - in[b]).lpNorm<Eigen::Infinity>();
      const double dw = (out[a] - out[b]).lpNorm<Eigen::Infinity>();
      if (dz == 0.0) {
        if (dw > 1e-9 + slack) {
          s.duplicate_conflict = true;
          s.worst_a = a;
          s.worst_b = b;
          s.worst_violation = dw;
        }
        continue;
      }
      const double ratio = dw / dz;
      if (ratio > s.implied_L) s.implied_L = ratio;
      const double violation = dw - L * dz;
      if (violation > s.worst_violation) {
        s.worst_violation = violation;
        s.worst_a = a;
        s.worst_b = b;
      }
    }
  }
  return s;
}

}  // namespace

AnchoredExtension AnchoredExtension::build(std::vector<Vector> inputs,
                                           std::vector<Vector> outputs, double L, double slack) {
  if (inputs.empty() || inputs.size() != outputs.size())
    throw std::invalid_argument("AnchoredExtension: need matching nonempty anchor lists");
  if (!(L >= 0)) throw std::invalid_argument("AnchoredExtension: L must be nonnegative");

  const ConsistencyScan scan = scan_anchors(inputs, outputs, L, slack);
  if (scan.duplicate_conflict)
    throw NumericError("AnchoredExtension: anchors " + std::to_string(scan.worst_a) + " and " +
                       std::to_string(scan.worst_b) +
                       " share an input but differ in output by " +
                       std::to_string(scan.worst_violation));
  if (scan.worst_violation > 1e-9 + slack)
    throw NumericError("AnchoredExtension: anchors " + std::to_string(scan.worst_a) + " and " +
                       std::to_string(scan.worst_b) + " violate the constant by " +
                       std::to_string(scan.worst_violation) + "; minimal consistent L is " +
                       std::to_string(scan.implied_L));

  AnchoredExtension ext;
  ext.inputs_ = std::move(inputs);
  ext.outputs_ = std::move(outputs);
  // evaluating with max(L, exact max ratio) keeps the min attained at each
  // anchor, so anchors reproduce bit-exactly
  ext.L_ = std::max(L, scan.implied_L);
  return ext;
}

AnchoredExtension AnchoredExtension::build_auto(std::vector<Vector> inputs,
                                                std::vector<Vector> outputs) {
  if (inputs.empty() || inputs.size() != outputs.size())
    throw std::invalid_argument("AnchoredExtension: need matching nonempty anchor lists");
  const ConsistencyScan scan = scan_anchors(inputs, outputs, 0.0, 0.0);
  if (scan.duplicate_conflict)
    throw NumericError("AnchoredExtension: duplicate inputs with distinct outputs");
  AnchoredExtension ext;
  ext.inputs_ = std::move(inputs);
  ext.outputs_ = std::move(outputs);
  ext.L_ = scan.implied_L;
  return ext;
}

Vector AnchoredExtension::evaluate(const Vector& z) const {
  if (z.size() != in_dim()) throw std::invalid_argument("AnchoredExtension: input dim mismatch");

  // exact anchor hit returns the stored output directly
  for (std::size_t a = 0; a < inputs_.size(); ++a) {
    if ((z - inputs_[a]).lpNorm<Eigen::Infinity>() == 0.0) return outputs_[a];
  }

  Vector w = Vector::Constant(out_dim(), std::numeric_limits<double>::infinity());
  for (std::size_t a = 0; a < inputs_.size(); ++a) {
    const double cone = L_ * (z - inputs_[a]).lpNorm<Eigen::Infinity>();
    w = w.cwiseMin((outputs_[a].array() + cone).matrix());
  }
  return w;
}

ReconstructionPlan::ReconstructionPlan(std::shared_ptr<const GroupPlan> plan,
                                       std::shared_ptr<const SampleGrid> grid,
                                       std::vector<double> group_M,
                                       std::optional<AnalyticInverse> analytic)
    : plan_(std::move(plan)),
      grid_(std::move(grid)),
      group_M_(std::move(group_M)),
      analytic_(std::move(analytic)) {
  if (!plan_ || !grid_) throw std::invalid_argument("ReconstructionPlan: plan and grid required");
  if (group_M_.size() != plan_->groups.size())
    throw std::invalid_argument("ReconstructionPlan: one M constant per group required");
}

const AnchoredExtension& ReconstructionPlan::group_extension(int j,
                                                             const IndexSet& I_local) const {
  const auto key = std::make_pair(j, I_local.indices());
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = group_ext_.find(key);
    if (it != group_ext_.end()) return *it->second;
  }
  const auto& group = plan_->groups[static_cast<std::size_t>(j)];
  const int m = group.sensors.size();
  auto sub_cloud = grid_->image_cloud(group.psi, I_local);
  auto full_cloud = grid_->image_cloud(group.psi, IndexSet::full(m));
  auto ext = std::make_shared<AnchoredExtension>(AnchoredExtension::build(
      sub_cloud->points, full_cloud->points, group_M_[static_cast<std::size_t>(j)]));
  std::lock_guard<std::mutex> lock(mutex_);
  return *group_ext_.emplace(key, std::move(ext)).first->second;
}

const AnchoredExtension& ReconstructionPlan::global_inverse() const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (inverse_) return *inverse_;
  }
  // anchors: concatenated full group images -> grid states
  std::vector<std::shared_ptr<const ImageCloud>> clouds;
  int dim = 0;
  for (std::size_t j = 0; j < plan_->groups.size(); ++j) {
    const auto& group = plan_->groups[j];
    clouds.push_back(grid_->image_cloud(group.psi, IndexSet::full(group.sensors.size())));
    dim += group.psi.out_layout().total();
  }
  const auto& states = grid_->points();
  std::vector<Vector> inputs(states.size(), Vector(dim));
  for (std::size_t k = 0; k < states.size(); ++k) {
    int at = 0;
    for (const auto& cloud : clouds) {
      inputs[k].segment(at, cloud->points[k].size()) = cloud->points[k];
      at += static_cast<int>(cloud->points[k].size());
    }
  }
  auto ext = std::make_shared<AnchoredExtension>(
      AnchoredExtension::build_auto(std::move(inputs), std::vector<Vector>(states)));
  std::lock_guard<std::mutex> lock(mutex_);
  if (!inverse_) inverse_ = std::move(ext);
  return *inverse_;
}

GroupRecovery ReconstructionPlan::recover_group(int j, const IndexSet& I_local, const Vector& xi,
                                                double delta_t,
                                                double lipschitz_delta_slack) const {
  const AnchoredExtension& ext = group_extension(j, I_local);
  GroupRecovery rec;
  rec.psi_estimate = ext.evaluate(xi);
  const double M = group_M_[static_cast<std::size_t>(j)];
  rec.bound = (2.0 * M * M + M) * delta_t +
              M * (M + 1.0) * lipschitz_delta_slack * grid_->delta();
  return rec;
}

Vector ReconstructionPlan::recover_state(const std::vector<Vector>& group_psi_estimates) const {
  if (group_psi_estimates.size() != plan_->groups.size())
    throw std::invalid_argument("recover_state: one estimate per group required");
  const AnchoredExtension& inv = global_inverse();
  Vector stacked(inv.in_dim());
  int at = 0;
  for (const auto& est : group_psi_estimates) {
    stacked.segment(at, est.size()) = est;
    at += static_cast<int>(est.size());
  }
  return inv.evaluate(stacked);
}

Vector ReconstructionPlan::recover_state(
    const std::vector<std::pair<IndexSet, Vector>>& identified,
    const std::vector<Vector>& group_psi_estimates) const {
  if (analytic_) return (*analytic_)(identified);
  return recover_state(group_psi_estimates);
}

}  // namespace rse
