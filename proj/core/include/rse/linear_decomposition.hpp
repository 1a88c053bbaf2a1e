#pragma once

#include <complex>
#include <string>
#include <vector>

#include "rse/combinatorics.hpp"
#include "rse/identification.hpp"
#include "rse/plant.hpp"
#include "rse/types.hpp"

namespace rse {

struct LinearSystem {
  Matrix A;  // n x n
  Matrix C;  // p x n, one row per sensor
};

/// Conjugate-closed eigenvalue cluster; a factor gamma^j of the
/// characteristic polynomial with the cluster's roots.
struct RootCluster {
  std::vector<std::complex<double>> roots;
};

/// Clusters the spectrum of A: complex-conjugate pairs stay together and
/// eigenvalues within cluster_tol (relative to the spectral radius) merge.
/// Clusters have disjoint root sets, so the factors are relatively prime.
std::vector<RootCluster> factor_relprime(const Matrix& A, double cluster_tol = 1e-6);

struct BlockDiagonalization {
  Matrix T_x;      // new coordinates are T_x * x
  Matrix T_x_inv;  // columns are the invariant-subspace bases
  std::vector<Matrix> blocks;  // A^j = diagonal blocks of T_x A T_x_inv
  std::vector<int> block_sizes;
  std::vector<RootCluster> clusters;
  double offdiag_residual = 0.0;
  double condition = 0.0;  // condition number of T_x

  int block_count() const { return static_cast<int>(blocks.size()); }
  int block_offset(int j) const {  // 0-based j
    int at = 0;
    for (int b = 0; b < j; ++b) at += block_sizes[static_cast<std::size_t>(b)];
    return at;
  }
};

/// Invariant subspace per factor computed as the kernel of gamma^j(A);
/// asserts the off-diagonal residual of T_x A T_x^{-1} stays below 1e-8.
BlockDiagonalization block_diagonalize(const Matrix& A, const std::vector<RootCluster>& clusters);

/// Per-sensor observability stacks O_i^j = col{C_i^j (A^j)^{k-1}}_{k=1..n} and
/// the set N_i of blocks the sensor actually observes.
struct ObservabilityBlocks {
  std::vector<Matrix> O;  // one n x n^j stack per block j (zero matrices kept)
  IndexSet N;             // 1-based blocks with ||O_i^j|| > 1e-10 ||C_i||
};

ObservabilityBlocks observability_blocks(const Eigen::RowVectorXd& C_i,
                                         const BlockDiagonalization& bd);

/// Coordinate change T_i on the observable part of sensor i and its block-row
/// projections T_i^j, built from orthonormal bases of the image spaces of the
/// O_i^j. Also records the observable dimension n_i, the per-block dims
/// n_i^j, and W^j = tau_j^T O_i^j (the local linear maps phi_i^j).
struct SensorCoordinates {
  int n_i = 0;
  std::vector<int> sub_dims;   // n_i^j for j in N (same order)
  Matrix T;                    // n_i x n_i
  std::vector<Matrix> T_rows;  // T_i^j, block rows of T (aligned with N)
  std::vector<Matrix> W;       // phi_i^j as a matrix on the j-th sub-state
  Matrix obs_rows;             // Phi_i in original coordinates: first n_i independent rows of col{C_i A^{k-1}}
};

SensorCoordinates build_Ti(const ObservabilityBlocks& ob, const Eigen::RowVectorXd& C_i,
                           const BlockDiagonalization& bd, double rank_tol = 1e-10);

struct LinearPlan {
  BlockDiagonalization bd;
  std::vector<ObservabilityBlocks> sensor_blocks;
  std::vector<SensorCoordinates> sensor_coords;
  GroupPlan plan;
  ComplexityReport complexity;

  std::string to_json() const;
};

/// Full Proposition-5 pipeline: factor, block-diagonalize, derive N_i, groups
/// P_j = {i : j in N_i}, projections T_i^j, local linear maps Psi^j (with
/// their subspace bases), and the complexity report.
LinearPlan plan_from_linear(const LinearSystem& sys, int q, double cluster_tol = 1e-6);

/// Uniformly observable canonical form of (A, B, C_i) on the observable part:
/// z = Obs_i x with alpha and betas linear, for driving the observer bank.
CanonicalForm canonical_from_linear(const Matrix& A, const Vector& B,
                                    const Eigen::RowVectorXd& C_i, const Matrix& obs_rows);

/// Plant model for a linear system (f = Ax, g = B): observability maps from
/// the decomposition, canonical forms per sensor.
PlantModel plant_from_linear(const LinearSystem& sys, const Vector& B, const LinearPlan& plan);

/// Plain-text matrix file: one row per line, whitespace-separated reals.
Matrix read_matrix_file(const std::string& path);

}  // namespace rse
