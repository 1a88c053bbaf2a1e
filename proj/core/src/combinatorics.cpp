#include "rse/combinatorics.hpp"

#include <stdexcept>

namespace rse {

BigUint binomial(int p, int q) {
  if (q < 0 || p < 0 || q > p) throw std::invalid_argument("binomial: need 0 <= q <= p");
  if (q > p - q) q = p - q;
  BigUint result = 1;
  for (int k = 1; k <= q; ++k) {
    result *= (p - q + k);
    result /= k;  // exact: result is C(p-q+k, k) after this step
  }
  return result;
}

CombinationStream::CombinationStream(int p, int q) : p_(p), q_(q), done_(false) {
  if (q < 0 || p < 0 || q > p) throw std::invalid_argument("CombinationStream: need 0 <= q <= p");
  current_.resize(static_cast<std::size_t>(q));
  for (int k = 0; k < q; ++k) current_[static_cast<std::size_t>(k)] = k + 1;
}

std::optional<IndexSet> CombinationStream::next() {
  if (done_) return std::nullopt;
  IndexSet out{std::vector<int>(current_)};
  // advance to the lexicographic successor
  int k = q_ - 1;
  while (k >= 0 && current_[static_cast<std::size_t>(k)] == p_ - q_ + k + 1) --k;
  if (k < 0) {
    done_ = true;
  } else {
    ++current_[static_cast<std::size_t>(k)];
    for (int j = k + 1; j < q_; ++j)
      current_[static_cast<std::size_t>(j)] = current_[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

std::vector<IndexSet> CombinationStream::all(int p, int q) {
  CombinationStream stream(p, q);
  std::vector<IndexSet> out;
  while (auto s = stream.next()) out.push_back(std::move(*s));
  return out;
}

ComplexityReport complexity_report(int p, int q, const std::vector<IndexSet>& groups) {
  std::vector<bool> covered(static_cast<std::size_t>(p), false);
  for (const auto& g : groups) {
    if (g.max_index() > p) throw std::invalid_argument("complexity_report: group index exceeds p");
    for (int i : g.indices()) covered[static_cast<std::size_t>(i - 1)] = true;
  }
  for (int i = 0; i < p; ++i) {
    if (!covered[static_cast<std::size_t>(i)])
      throw std::invalid_argument("complexity_report: groups do not cover {1..p}, missing " +
                                  std::to_string(i + 1));
  }
  ComplexityReport report;
  report.global = binomial(p, q);
  report.local = 0;
  for (const auto& g : groups) report.local += binomial(g.size(), q);
  return report;
}

}  // namespace rse
