#pragma once

#include <functional>
#include <string>
#include <utility>

#include "rse/types.hpp"

namespace rse {

/// A block-valued map x -> col{Phi_i(x)} with a stable identifier (used as a
/// cache key for image clouds) and an optional analytic Jacobian.
class VectorMap {
 public:
  using Evaluator = std::function<Vector(const Vector&)>;
  using JacobianFn = std::function<Matrix(const Vector&)>;

  VectorMap() = default;

  VectorMap(std::string id, int dim_in, BlockLayout out_layout, Evaluator evaluate,
            JacobianFn jacobian = nullptr)
      : id_(std::move(id)),
        dim_in_(dim_in),
        out_layout_(std::move(out_layout)),
        evaluate_(std::move(evaluate)),
        jacobian_(std::move(jacobian)) {}

  /// Linear map x -> M x with one scalar block per row unless a layout is given.
  static VectorMap linear(std::string id, const Matrix& M);
  static VectorMap linear(std::string id, const Matrix& M, BlockLayout out_layout);

  const std::string& id() const { return id_; }
  int dim_in() const { return dim_in_; }
  int dim_out() const { return out_layout_.total(); }
  const BlockLayout& out_layout() const { return out_layout_; }
  bool has_analytic_jacobian() const { return static_cast<bool>(jacobian_); }

  PartitionedVector operator()(const Vector& x) const {
    return PartitionedVector(out_layout_, evaluate_raw(x));
  }

  Vector evaluate_raw(const Vector& x) const;

  /// Analytic Jacobian when declared, central finite differences otherwise
  /// (step 1e-6 scaled by max(1, |x_k|)).
  Matrix jacobian(const Vector& x) const;

 private:
  std::string id_;
  int dim_in_ = 0;
  BlockLayout out_layout_;
  Evaluator evaluate_;
  JacobianFn jacobian_;
};

}  // namespace rse
