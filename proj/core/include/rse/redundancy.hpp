#pragma once

#include <optional>
#include <string>

#include "rse/sample_grid.hpp"
#include "rse/types.hpp"
#include "rse/vector_map.hpp"

namespace rse {

/// Outcome of a grid-relative redundancy decision. `holds == false` always
/// comes with a violating witness (x1, x2, I): the subset images match within
/// eps_match while the full images differ beyond eps_sep.
struct RedundancyVerdict {
  int k = 0;
  bool holds = false;
  struct Witness {
    Vector x1, x2;
    IndexSet I;
    double sub_distance = 0.0;
    double full_distance = 0.0;
  };
  std::optional<Witness> witness;
  std::optional<double> M_hat;  // estimated Lipschitz-redundancy constant
  double eps_match = 0.0;       // tolerances actually used (last subset when per-I)
  double eps_sep = 0.0;
  double grid_delta = 0.0;
  std::int64_t subsets_checked = 0;

  std::string to_json() const;
};

/// Tolerance pair; when unset, per-subset defaults eps_match = 2 L(Phi_I) Delta
/// and eps_sep = 10 eps_match are derived from grid Lipschitz estimates.
struct RedundancyTolerances {
  std::optional<double> eps_match;
  std::optional<double> eps_sep;
};

/// Grid-relative k-redundancy check: enumerates subsets I with |I| = p - k in
/// lexicographic order (supersets hold a fortiori) and searches grid pairs for
/// a violation. The verdict is an approximation of the continuum definition,
/// reported with the tolerances used.
RedundancyVerdict check_k_redundant(const VectorMap& map, const SampleGrid& grid, int k,
                                    const RedundancyTolerances& tol = {});

/// Largest grid ratio ||Phi(x1)-Phi(x2)|| / ||Phi_I(x1)-Phi_I(x2)|| over all
/// |I| = p - k; a lower bound for the true M_Phi. A pair with exactly equal
/// subset images but distinct full images is a redundancy violation and
/// throws NumericError. Beyond `pair_cap` pairs a deterministic seeded
/// subsample is scanned, as in estimate_lipschitz.
double estimate_M(const VectorMap& map, const SampleGrid& grid, int k,
                  std::int64_t pair_cap = 2'000'000);

/// Jacobian rank criterion: at every grid point and every |I| = p - k,
/// numerical rank(D Phi_I) == numerical rank(D Phi), singular values
/// thresholded at rank_tol * sigma_max.
struct RankCriterionVerdict {
  bool holds = true;
  Vector counterexample_state;
  IndexSet counterexample_I;
  int rank_full = 0;
  int rank_sub = 0;
};

RankCriterionVerdict check_rank_criterion(const VectorMap& map, const SampleGrid& grid, int k,
                                          double rank_tol = 1e-8);

}  // namespace rse
