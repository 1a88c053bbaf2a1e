#include "rse/redundancy.hpp"

#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include <random>

#include "rse/combinatorics.hpp"
#include "rse/errors.hpp"

namespace rse {

namespace {

int numerical_rank(const Matrix& M, double rank_tol) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return 0;
  const double cut = rank_tol * sv[0];
  int r = 0;
  while (r < sv.size() && sv[r] > cut) ++r;
  return r;
}

}  // namespace

std::string RedundancyVerdict::to_json() const {
  nlohmann::json j;
  j["k"] = k;
  j["holds"] = holds;
  if (witness) {
    nlohmann::json w;
    w["x1"] = std::vector<double>(witness->x1.data(), witness->x1.data() + witness->x1.size());
    w["x2"] = std::vector<double>(witness->x2.data(), witness->x2.data() + witness->x2.size());
    w["I"] = witness->I.indices();
    w["sub_distance"] = witness->sub_distance;
    w["full_distance"] = witness->full_distance;
    j["witness"] = w;
  } else {
    j["witness"] = nullptr;
  }
  if (M_hat)
    j["M_hat"] = *M_hat;
  else
    j["M_hat"] = nullptr;
  j["tolerances"] = {{"eps_match", eps_match}, {"eps_sep", eps_sep}};
  j["grid_delta"] = grid_delta;
  j["subsets_checked"] = subsets_checked;
  return j.dump(2);
}

RedundancyVerdict check_k_redundant(const VectorMap& map, const SampleGrid& grid, int k,
                                    const RedundancyTolerances& tol) {
  const int p = map.out_layout().block_count();
  if (k < 0 || k >= p) throw std::invalid_argument("check_k_redundant: need 0 <= k < p");
  if (tol.eps_match && tol.eps_sep && !(*tol.eps_sep > *tol.eps_match))
    throw std::invalid_argument("check_k_redundant: need eps_sep > eps_match");

  RedundancyVerdict verdict;
  verdict.k = k;
  verdict.holds = true;
  verdict.grid_delta = grid.delta();

  auto full_cloud = grid.image_cloud(map, IndexSet::full(p));
  const auto& full = full_cloud->points;
  const std::size_t n = full.size();

  CombinationStream subsets(p, p - k);
  while (auto I = subsets.next()) {
    ++verdict.subsets_checked;
    const double eps_match =
        tol.eps_match ? *tol.eps_match : 2.0 * estimate_lipschitz(map, *I, grid) * grid.delta();
    const double eps_sep = tol.eps_sep ? *tol.eps_sep : 10.0 * eps_match;
    verdict.eps_match = eps_match;
    verdict.eps_sep = eps_sep;

    auto sub_cloud = grid.image_cloud(map, *I);
    const auto& sub = sub_cloud->points;

    for (std::size_t a = 0; a < n && verdict.holds; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        const double ds = (sub[a] - sub[b]).lpNorm<Eigen::Infinity>();
        if (ds > eps_match) continue;
        const double df = (full[a] - full[b]).lpNorm<Eigen::Infinity>();
        if (df > eps_sep) {
          verdict.holds = false;
          RedundancyVerdict::Witness w;
          w.x1 = full_cloud->states[a];
          w.x2 = full_cloud->states[b];
          w.I = *I;
          w.sub_distance = ds;
          w.full_distance = df;
          verdict.witness = std::move(w);
          break;
        }
      }
    }
    if (!verdict.holds) break;
  }

  if (verdict.holds) verdict.M_hat = estimate_M(map, grid, k);
  return verdict;
}

double estimate_M(const VectorMap& map, const SampleGrid& grid, int k, std::int64_t pair_cap) {
  const int p = map.out_layout().block_count();
  if (k < 0 || k >= p) throw std::invalid_argument("estimate_M: need 0 <= k < p");

  auto full_cloud = grid.image_cloud(map, IndexSet::full(p));
  const auto& full = full_cloud->points;
  const std::int64_t n = static_cast<std::int64_t>(full.size());

  const auto subsets = CombinationStream::all(p, p - k);
  std::vector<std::shared_ptr<const ImageCloud>> sub_clouds;
  sub_clouds.reserve(subsets.size());
  for (const auto& I : subsets) sub_clouds.push_back(grid.image_cloud(map, I));

  double M = 0.0;
  auto consider = [&](std::int64_t a, std::int64_t b) {
    const double df = (full[static_cast<std::size_t>(a)] - full[static_cast<std::size_t>(b)])
                          .lpNorm<Eigen::Infinity>();
    if (df == 0.0) return;
    for (std::size_t s = 0; s < subsets.size(); ++s) {
      const auto& sub = sub_clouds[s]->points;
      const double ds = (sub[static_cast<std::size_t>(a)] - sub[static_cast<std::size_t>(b)])
                            .lpNorm<Eigen::Infinity>();
      if (ds == 0.0) {
        throw NumericError("estimate_M: redundancy violation, subset " + subsets[s].to_string() +
                           " maps two states with distinct images to the same point");
      }
      M = std::max(M, df / ds);
    }
  };

  const std::int64_t total_pairs = n * (n - 1) / 2;
  if (total_pairs <= pair_cap) {
    for (std::int64_t a = 0; a < n; ++a)
      for (std::int64_t b = a + 1; b < n; ++b) consider(a, b);
  } else {
    std::mt19937_64 rng(0x5eedc0de);
    std::uniform_int_distribution<std::int64_t> pick(0, n - 1);
    for (std::int64_t k2 = 0; k2 < pair_cap; ++k2) {
      const std::int64_t a = pick(rng);
      const std::int64_t b = pick(rng);
      if (a != b) consider(a, b);
    }
  }
  return M;
}

RankCriterionVerdict check_rank_criterion(const VectorMap& map, const SampleGrid& grid, int k,
                                          double rank_tol) {
  const int p = map.out_layout().block_count();
  if (k < 0 || k >= p) throw std::invalid_argument("check_rank_criterion: need 0 <= k < p");
  const auto subsets = CombinationStream::all(p, p - k);
  const BlockLayout& layout = map.out_layout();

  RankCriterionVerdict verdict;
  for (const auto& x : grid.points()) {
    const Matrix J = map.jacobian(x);
    const int rank_full = numerical_rank(J, rank_tol);
    for (const auto& I : subsets) {
      Matrix JI(sub_layout(layout, I).total(), J.cols());
      int at = 0;
      for (int i : I.indices()) {
        JI.middleRows(at, layout.size(i)) = J.middleRows(layout.offset(i), layout.size(i));
        at += layout.size(i);
      }
      const int rank_sub = numerical_rank(JI, rank_tol);
      if (rank_sub != rank_full) {
        verdict.holds = false;
        verdict.counterexample_state = x;
        verdict.counterexample_I = I;
        verdict.rank_full = rank_full;
        verdict.rank_sub = rank_sub;
        return verdict;
      }
    }
  }
  return verdict;
}

}  // namespace rse
