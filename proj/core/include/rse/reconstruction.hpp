#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "rse/identification.hpp"
#include "rse/sample_grid.hpp"
#include "rse/types.hpp"

namespace rse {

/// Constructive Lipschitz extension anchored at finite (input, output) pairs:
///   w_c(z) = min over anchors a of ( w_{a,c} + L ||z - z_a||_inf ).
/// Anchors must be mutually consistent at the requested constant; the
/// evaluator is Lipschitz with constant `lipschitz()` (the requested L or the
/// exact max anchor ratio, whichever is larger) and reproduces its anchors
/// bit-exactly.
class AnchoredExtension {
 public:
  static AnchoredExtension build(std::vector<Vector> inputs, std::vector<Vector> outputs,
                                 double L, double slack = 0.0);

  /// Like build, with L taken as the exact max anchor ratio.
  static AnchoredExtension build_auto(std::vector<Vector> inputs, std::vector<Vector> outputs);

  Vector evaluate(const Vector& z) const;

  double lipschitz() const { return L_; }
  int anchor_count() const { return static_cast<int>(inputs_.size()); }
  int in_dim() const { return inputs_.empty() ? 0 : static_cast<int>(inputs_[0].size()); }
  int out_dim() const { return outputs_.empty() ? 0 : static_cast<int>(outputs_[0].size()); }

 private:
  std::vector<Vector> inputs_;
  std::vector<Vector> outputs_;
  double L_ = 0.0;
};

struct GroupRecovery {
  Vector psi_estimate;  // recovered Psi^j(x(t))
  double bound = 0.0;   // (2 M^2 + M) delta + M (M+1) L Delta, recorded
};

/// Analytic left inverse hook: maps per-group (chosen global subset,
/// identified estimate) pairs to a state estimate.
using AnalyticInverse =
    std::function<Vector(const std::vector<std::pair<IndexSet, Vector>>&)>;

/// Recovery of Phi(x) and x from identified subsets: per-(group, subset)
/// extensions anchored at grid images, built lazily on first use, plus the
/// global inverse extension anchored at (col_j Psi^j(x_g), x_g).
class ReconstructionPlan {
 public:
  ReconstructionPlan(std::shared_ptr<const GroupPlan> plan,
                     std::shared_ptr<const SampleGrid> grid, std::vector<double> group_M,
                     std::optional<AnalyticInverse> analytic = std::nullopt);

  const AnchoredExtension& group_extension(int j, const IndexSet& I_local) const;
  const AnchoredExtension& global_inverse() const;

  double group_M(int j) const { return group_M_[static_cast<std::size_t>(j)]; }
  bool has_analytic() const { return analytic_.has_value(); }

  /// psi_{I_j}(xi) with the recorded error bound; requires the subset to have
  /// passed inspection at t (the caller guarantees it).
  GroupRecovery recover_group(int j, const IndexSet& I_local, const Vector& xi,
                              double delta_t, double lipschitz_delta_slack = 0.0) const;

  /// Extension path: global inverse applied to concatenated group estimates.
  Vector recover_state(const std::vector<Vector>& group_psi_estimates) const;

  /// Analytic path when registered; falls back to the extension path.
  Vector recover_state(const std::vector<std::pair<IndexSet, Vector>>& identified,
                       const std::vector<Vector>& group_psi_estimates) const;

 private:
  std::shared_ptr<const GroupPlan> plan_;
  std::shared_ptr<const SampleGrid> grid_;
  std::vector<double> group_M_;
  std::optional<AnalyticInverse> analytic_;

  mutable std::mutex mutex_;
  mutable std::map<std::pair<int, std::vector<int>>, std::shared_ptr<const AnchoredExtension>>
      group_ext_;
  mutable std::shared_ptr<const AnchoredExtension> inverse_;
};

}  // namespace rse
