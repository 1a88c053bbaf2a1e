#include "rse/linear_decomposition.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rse/errors.hpp"

namespace rse {

namespace {

int rank_from_svd(const Eigen::JacobiSVD<Matrix>& svd, double rel_tol) {
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return 0;
  const double cut = rel_tol * sv[0];
  int r = 0;
  while (r < sv.size() && sv[r] > cut) ++r;
  return r;
}

// gamma^j(A): product of (A - r I) over real roots and
// (A^2 - 2 Re(r) A + |r|^2 I) over conjugate pairs.
Matrix evaluate_factor(const Matrix& A, const RootCluster& cluster) {
  const int n = static_cast<int>(A.rows());
  Matrix out = Matrix::Identity(n, n);
  std::vector<std::complex<double>> pending = cluster.roots;
  while (!pending.empty()) {
    const auto r = pending.back();
    pending.pop_back();
    if (std::abs(r.imag()) < 1e-12) {
      out = out * (A - r.real() * Matrix::Identity(n, n));
    } else {
      // pull the conjugate partner out of the pending list
      auto it = std::min_element(pending.begin(), pending.end(),
                                 [&](const auto& a, const auto& b) {
                                   return std::abs(a - std::conj(r)) < std::abs(b - std::conj(r));
                                 });
      if (it == pending.end())
        throw NumericError("factor_relprime: complex root without conjugate partner");
      pending.erase(it);
      out = out * (A * A - 2.0 * r.real() * A +
                   std::norm(r) * Matrix::Identity(n, n));
    }
  }
  return out;
}

}  // namespace

std::vector<RootCluster> factor_relprime(const Matrix& A, double cluster_tol) {
  if (A.rows() != A.cols() || A.rows() == 0)
    throw std::invalid_argument("factor_relprime: A must be square and nonempty");

  Eigen::EigenSolver<Matrix> es(A);
  if (es.info() != Eigen::Success) throw NumericError("factor_relprime: eigensolver failed");

  std::vector<std::complex<double>> roots(es.eigenvalues().data(),
                                          es.eigenvalues().data() + es.eigenvalues().size());
  // canonical order: by real part, then by |imag| (conjugates adjacent)
  std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return std::abs(a.imag()) < std::abs(b.imag());
  });

  double scale = 0.0;
  for (const auto& r : roots) scale = std::max(scale, std::abs(r));
  const double tol = cluster_tol * std::max(scale, 1.0);

  // union-find over roots: same cluster when within tol or conjugate partners
  const std::size_t m = roots.size();
  std::vector<std::size_t> parent(m);
  for (std::size_t k = 0; k < m; ++k) parent[k] = k;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  auto unite = [&](std::size_t a, std::size_t b) { parent[find(a)] = find(b); };

  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      if (std::abs(roots[a] - roots[b]) <= tol) unite(a, b);
      if (std::abs(roots[a] - std::conj(roots[b])) <= tol) unite(a, b);
    }
  }

  std::vector<RootCluster> clusters;
  std::vector<std::size_t> cluster_of(m, SIZE_MAX);
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t root = find(k);
    if (cluster_of[root] == SIZE_MAX) {
      cluster_of[root] = clusters.size();
      clusters.emplace_back();
    }
    clusters[cluster_of[root]].roots.push_back(roots[k]);
  }
  return clusters;
}

BlockDiagonalization block_diagonalize(const Matrix& A,
                                       const std::vector<RootCluster>& clusters) {
  const int n = static_cast<int>(A.rows());
  BlockDiagonalization bd;
  bd.clusters = clusters;

  if (clusters.size() == 1) {
    bd.T_x = Matrix::Identity(n, n);
    bd.T_x_inv = Matrix::Identity(n, n);
    bd.blocks = {A};
    bd.block_sizes = {n};
    bd.offdiag_residual = 0.0;
    bd.condition = 1.0;
    return bd;
  }

  // invariant subspace of factor gamma^j = kernel of gamma^j(A)
  std::vector<Matrix> bases;
  int total = 0;
  for (const auto& cluster : clusters) {
    const Matrix G = evaluate_factor(A, cluster);
    Eigen::JacobiSVD<Matrix> svd(G, Eigen::ComputeFullV);
    const int expected = static_cast<int>(cluster.roots.size());
    const int rank = rank_from_svd(svd, 1e-10);
    const int kdim = n - rank;
    if (kdim != expected)
      throw NumericError("block_diagonalize: kernel of a factor has dimension " +
                         std::to_string(kdim) + ", expected " + std::to_string(expected) +
                         " (cluster_tol too small for a nearly defective spectrum?)");
    bases.push_back(svd.matrixV().rightCols(kdim));
    total += kdim;
  }
  if (total != n)
    throw NumericError("block_diagonalize: kernel dimensions do not sum to n");

  Matrix Tinv(n, n);
  int at = 0;
  for (const auto& B : bases) {
    Tinv.middleCols(at, static_cast<int>(B.cols())) = B;
    at += static_cast<int>(B.cols());
  }

  Eigen::FullPivLU<Matrix> lu(Tinv);
  if (!lu.isInvertible())
    throw NumericError("block_diagonalize: subspace bases are not independent");

  bd.T_x_inv = Tinv;
  bd.T_x = lu.inverse();
  const Matrix D = bd.T_x * A * bd.T_x_inv;

  at = 0;
  double offdiag = 0.0;
  for (const auto& B : bases) {
    const int sz = static_cast<int>(B.cols());
    bd.blocks.push_back(D.block(at, at, sz, sz));
    bd.block_sizes.push_back(sz);
    at += sz;
  }
  // off-diagonal residual of the transformed matrix
  at = 0;
  for (std::size_t j = 0; j < bases.size(); ++j) {
    const int sz = bd.block_sizes[j];
    for (int r = at; r < at + sz; ++r) {
      for (int c = 0; c < n; ++c) {
        if (c >= at && c < at + sz) continue;
        offdiag = std::max(offdiag, std::abs(D(r, c)));
      }
    }
    at += sz;
  }
  bd.offdiag_residual = offdiag;
  if (offdiag > 1e-8)
    throw NumericError("block_diagonalize: off-diagonal residual " + std::to_string(offdiag) +
                       " exceeds 1e-8");

  Eigen::JacobiSVD<Matrix> condsvd(bd.T_x);
  bd.condition = condsvd.singularValues()(0) /
                 condsvd.singularValues()(condsvd.singularValues().size() - 1);
  return bd;
}

ObservabilityBlocks observability_blocks(const Eigen::RowVectorXd& C_i,
                                         const BlockDiagonalization& bd) {
  const int n = static_cast<int>(bd.T_x.rows());
  const Eigen::RowVectorXd Ct = C_i * bd.T_x_inv;  // [C_i^1, ..., C_i^l]
  const double c_norm = C_i.cwiseAbs().maxCoeff();

  ObservabilityBlocks ob;
  std::vector<int> nonzero;
  int at = 0;
  for (int j = 0; j < bd.block_count(); ++j) {
    const int sz = bd.block_sizes[static_cast<std::size_t>(j)];
    const Eigen::RowVectorXd Cj = Ct.segment(at, sz);
    Matrix stack(n, sz);
    Eigen::RowVectorXd row = Cj;
    for (int k = 0; k < n; ++k) {
      stack.row(k) = row;
      row = row * bd.blocks[static_cast<std::size_t>(j)];
    }
    ob.O.push_back(std::move(stack));
    if (ob.O.back().cwiseAbs().maxCoeff() > 1e-10 * std::max(c_norm, 1e-300))
      nonzero.push_back(j + 1);
    at += sz;
  }
  ob.N = IndexSet(std::move(nonzero));
  return ob;
}

SensorCoordinates build_Ti(const ObservabilityBlocks& ob, const Eigen::RowVectorXd& C_i,
                           const BlockDiagonalization& bd, double rank_tol) {
  if (ob.N.empty()) throw std::invalid_argument("build_Ti: sensor observes no block");
  const int n = static_cast<int>(bd.T_x.rows());

  SensorCoordinates sc;

  // orthonormal bases of the image spaces of O_i^j
  std::vector<Matrix> taus;
  int n_i = 0;
  for (int j : ob.N.indices()) {
    const Matrix& O = ob.O[static_cast<std::size_t>(j - 1)];
    Eigen::JacobiSVD<Matrix> svd(O, Eigen::ComputeThinU);
    const int rank = rank_from_svd(svd, rank_tol);
    if (rank == 0) throw NumericError("build_Ti: nonzero block with zero numerical rank");
    taus.push_back(svd.matrixU().leftCols(rank));
    sc.sub_dims.push_back(rank);
    n_i += rank;
  }
  sc.n_i = n_i;

  // full observability stack in original coordinates:
  // col{C_i A^{k-1}}_{k=1..n} = [O_i^1 ... O_i^l] T_x
  Matrix full_stack;
  {
    Matrix concat(n, n);
    int at = 0;
    for (int j = 0; j < bd.block_count(); ++j) {
      const int sz = bd.block_sizes[static_cast<std::size_t>(j)];
      concat.middleCols(at, sz) = ob.O[static_cast<std::size_t>(j)];
      at += sz;
    }
    full_stack = concat * bd.T_x;
  }
  (void)C_i;

  // claim of the construction: the image bases together span the stack image
  {
    Eigen::JacobiSVD<Matrix> svd(full_stack);
    const int stack_rank = rank_from_svd(svd, rank_tol);
    if (stack_rank != n_i)
      throw NumericError("build_Ti: image bases span dimension " + std::to_string(n_i) +
                         " but the stacked observability matrix has rank " +
                         std::to_string(stack_rank) + " (tolerance issue)");
  }

  // first n_i independent rows of the stack define Phi_i in original coords
  std::vector<int> kept;
  {
    Matrix kept_rows(0, n);
    for (int k = 0; k < n && static_cast<int>(kept.size()) < n_i; ++k) {
      Matrix candidate(kept_rows.rows() + 1, n);
      candidate.topRows(kept_rows.rows()) = kept_rows;
      candidate.bottomRows(1) = full_stack.row(k);
      Eigen::JacobiSVD<Matrix> svd(candidate);
      if (rank_from_svd(svd, rank_tol) == static_cast<int>(candidate.rows())) {
        kept.push_back(k);
        kept_rows = std::move(candidate);
      }
    }
    if (static_cast<int>(kept.size()) != n_i)
      throw NumericError("build_Ti: could not select n_i independent rows");
    sc.obs_rows = kept_rows;
  }

  // B = [tau^1 ... tau^l] restricted to the kept rows, inverted
  Matrix B(n, n_i);
  {
    int at = 0;
    for (const auto& tau : taus) {
      B.middleCols(at, static_cast<int>(tau.cols())) = tau;
      at += static_cast<int>(tau.cols());
    }
  }
  Matrix G(n_i, n_i);
  for (int r = 0; r < n_i; ++r) G.row(r) = B.row(kept[static_cast<std::size_t>(r)]);
  Eigen::FullPivLU<Matrix> lu(G);
  if (!lu.isInvertible())
    throw NumericError("build_Ti: restricted basis matrix is singular");
  sc.T = lu.inverse();

  int at = 0;
  for (std::size_t b = 0; b < taus.size(); ++b) {
    const int sz = sc.sub_dims[b];
    sc.T_rows.push_back(sc.T.middleRows(at, sz));
    const int j = ob.N.at(static_cast<int>(b));
    sc.W.push_back(taus[b].transpose() * ob.O[static_cast<std::size_t>(j - 1)]);
    at += sz;
  }
  return sc;
}

LinearPlan plan_from_linear(const LinearSystem& sys, int q, double cluster_tol) {
  if (sys.C.cols() != sys.A.rows())
    throw std::invalid_argument("plan_from_linear: C columns must match A");
  const int p = static_cast<int>(sys.C.rows());
  const int n = static_cast<int>(sys.A.rows());

  LinearPlan out;
  out.bd = block_diagonalize(sys.A, factor_relprime(sys.A, cluster_tol));
  const int l = out.bd.block_count();

  out.sensor_blocks.reserve(static_cast<std::size_t>(p));
  out.sensor_coords.reserve(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    out.sensor_blocks.push_back(observability_blocks(sys.C.row(i), out.bd));
    if (out.sensor_blocks.back().N.empty())
      throw SchemaError("plan_from_linear: sensor " + std::to_string(i + 1) +
                        " carries no information (zero output row)");
    out.sensor_coords.push_back(build_Ti(out.sensor_blocks.back(), sys.C.row(i), out.bd));
  }

  // groups P_j = {i : j in N_i}
  out.plan.p = p;
  for (int j = 1; j <= l; ++j) {
    std::vector<int> members;
    for (int i = 0; i < p; ++i)
      if (out.sensor_blocks[static_cast<std::size_t>(i)].N.contains(j)) members.push_back(i + 1);
    if (members.empty()) continue;  // block observed by nobody: no group
    SensorGroup group;
    group.sensors = IndexSet(std::move(members));

    // Psi^j(x) = col{ W_i^j * (T_x x)^j }: rows of a single linear map in x
    std::vector<int> layout_sizes;
    std::vector<Matrix> rows;
    const int off = out.bd.block_offset(j - 1);
    const int sz = out.bd.block_sizes[static_cast<std::size_t>(j - 1)];
    const Matrix sel = out.bd.T_x.middleRows(off, sz);  // x -> x^j
    Matrix basis(0, sz);
    for (int i : group.sensors.indices()) {
      const auto& sc = out.sensor_coords[static_cast<std::size_t>(i - 1)];
      int pos_in_N = 0;
      while (sc.W.size() > static_cast<std::size_t>(pos_in_N) &&
             out.sensor_blocks[static_cast<std::size_t>(i - 1)].N.at(pos_in_N) != j)
        ++pos_in_N;
      const Matrix& W = sc.W[static_cast<std::size_t>(pos_in_N)];
      rows.push_back(W * sel);
      layout_sizes.push_back(static_cast<int>(W.rows()));
      Matrix nb(basis.rows() + W.rows(), sz);
      nb.topRows(basis.rows()) = basis;
      nb.bottomRows(W.rows()) = W;
      basis = std::move(nb);

      group.projections.push_back(
          GroupProjection::linear(sc.T_rows[static_cast<std::size_t>(pos_in_N)]));
    }
    Matrix psi_matrix(basis.rows(), n);
    int at = 0;
    for (const auto& r : rows) {
      psi_matrix.middleRows(at, r.rows()) = r;
      at += static_cast<int>(r.rows());
    }
    group.psi = VectorMap::linear("linear_psi_" + std::to_string(j), psi_matrix,
                                  BlockLayout(layout_sizes));
    group.linear_basis = basis;
    out.plan.groups.push_back(std::move(group));
  }

  out.complexity = complexity_report(p, q, out.plan.group_index_sets());
  return out;
}

std::string LinearPlan::to_json() const {
  nlohmann::json j;
  j["l"] = bd.block_count();
  nlohmann::json blocks = nlohmann::json::array();
  for (int b = 0; b < bd.block_count(); ++b) {
    nlohmann::json bj;
    bj["size"] = bd.block_sizes[static_cast<std::size_t>(b)];
    nlohmann::json spectrum = nlohmann::json::array();
    for (const auto& r : bd.clusters[static_cast<std::size_t>(b)].roots)
      spectrum.push_back({{"re", r.real()}, {"im", r.imag()}});
    bj["spectrum"] = spectrum;
    blocks.push_back(bj);
  }
  j["blocks"] = blocks;
  nlohmann::json per_sensor = nlohmann::json::array();
  for (const auto& sb : sensor_blocks) per_sensor.push_back(sb.N.indices());
  j["N_i"] = per_sensor;
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : plan.groups) groups.push_back(g.sensors.indices());
  j["groups"] = groups;
  j["complexity"] = {{"global", complexity.global.str()}, {"local", complexity.local.str()}};
  j["T_x_condition"] = bd.condition;
  return j.dump(2);
}

CanonicalForm canonical_from_linear(const Matrix& A, const Vector& B,
                                    const Eigen::RowVectorXd& C_i, const Matrix& obs_rows) {
  const int n_i = static_cast<int>(obs_rows.rows());
  CanonicalForm cf;
  cf.dim = n_i;

  // alpha: last canonical derivative expressed in the canonical coordinates
  const Eigen::RowVectorXd last = obs_rows.row(n_i - 1) * A;
  Eigen::ColPivHouseholderQR<Matrix> qr(obs_rows.transpose());
  const Vector a = qr.solve(last.transpose());
  if ((obs_rows.transpose() * a - last.transpose()).lpNorm<Eigen::Infinity>() > 1e-8)
    throw NumericError("canonical_from_linear: top derivative not in the row space");
  cf.alpha = [a](const Vector& z) { return a.dot(z); };

  for (int k = 0; k < n_i; ++k) {
    const double beta_k = obs_rows.row(k) * B;
    cf.betas.push_back([beta_k](const Vector&) { return beta_k; });
  }
  (void)C_i;
  return cf;
}

PlantModel plant_from_linear(const LinearSystem& sys, const Vector& B, const LinearPlan& plan) {
  const int n = static_cast<int>(sys.A.rows());
  const int p = static_cast<int>(sys.C.rows());
  if (B.size() != n) throw std::invalid_argument("plant_from_linear: B dimension mismatch");

  PlantModel plant;
  plant.n = n;
  plant.p = p;

  std::vector<int> sizes;
  Matrix phi_matrix(0, n);
  for (int i = 0; i < p; ++i) {
    const auto& sc = plan.sensor_coords[static_cast<std::size_t>(i)];
    sizes.push_back(sc.n_i);
    Matrix nb(phi_matrix.rows() + sc.obs_rows.rows(), n);
    nb.topRows(phi_matrix.rows()) = phi_matrix;
    nb.bottomRows(sc.obs_rows.rows()) = sc.obs_rows;
    phi_matrix = std::move(nb);
  }
  plant.layout = BlockLayout(sizes);
  plant.phi = VectorMap::linear("linear_phi", phi_matrix, plant.layout);

  const Matrix A = sys.A;
  const Vector Bv = B;
  plant.f = [A](const Vector& x) -> Vector { return A * x; };
  plant.g = [Bv](const Vector&) -> Vector { return Bv; };
  for (int i = 0; i < p; ++i) {
    const Eigen::RowVectorXd row = sys.C.row(i);
    plant.h.push_back([row](const Vector& x) { return row.dot(x); });
    plant.canonical.push_back(canonical_from_linear(
        sys.A, B, sys.C.row(i), plan.sensor_coords[static_cast<std::size_t>(i)].obs_rows));
  }
  return plant;
}

Matrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("read_matrix_file: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::vector<double> row;
    double v;
    while (ss >> v) row.push_back(v);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw SchemaError("read_matrix_file: empty matrix in " + path);
  const std::size_t cols = rows[0].size();
  for (const auto& r : rows)
    if (r.size() != cols) throw SchemaError("read_matrix_file: ragged rows in " + path);
  Matrix M(static_cast<int>(rows.size()), static_cast<int>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols; ++c)
      M(static_cast<int>(r), static_cast<int>(c)) = rows[r][c];
  return M;
}

}  // namespace rse
