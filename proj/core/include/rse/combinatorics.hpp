#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <vector>

#include "rse/types.hpp"

namespace rse {

using BigUint = boost::multiprecision::cpp_int;

/// Exact binomial coefficient C(p, q) via the multiplicative formula.
/// Each intermediate division is exact.
BigUint binomial(int p, int q);

/// Enumerates all C(p, q) subsets of {1,...,p} of size q in lexicographic
/// order. The order is part of the contract: the identification monitor's
/// switching policy scans subsets in exactly this sequence.
///   p=3, q=2  ->  {1,2}, {1,3}, {2,3}
class CombinationStream {
 public:
  CombinationStream(int p, int q);

  /// Next subset, or nullopt once exhausted. Re-constructing the stream
  /// replays the identical sequence.
  std::optional<IndexSet> next();

  static std::vector<IndexSet> all(int p, int q);

 private:
  int p_;
  int q_;
  bool done_;
  std::vector<int> current_;
};

struct ComplexityReport {
  BigUint global;  // C(p, q)
  BigUint local;   // sum_j C(|P_j|, q)
};

/// Case counts for global vs. locally decomposed attack identification.
/// Throws std::invalid_argument unless the groups cover {1,...,p}.
ComplexityReport complexity_report(int p, int q, const std::vector<IndexSet>& groups);

}  // namespace rse
