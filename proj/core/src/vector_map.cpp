#include "rse/vector_map.hpp"

#include <cmath>
#include <stdexcept>

#include "rse/errors.hpp"

namespace rse {

VectorMap VectorMap::linear(std::string id, const Matrix& M) {
  return linear(std::move(id), M, BlockLayout::uniform(static_cast<int>(M.rows())));
}

VectorMap VectorMap::linear(std::string id, const Matrix& M, BlockLayout out_layout) {
  if (out_layout.total() != M.rows())
    throw std::invalid_argument("VectorMap::linear: layout does not match row count");
  Matrix Mc = M;
  return VectorMap(
      std::move(id), static_cast<int>(M.cols()), std::move(out_layout),
      [Mc](const Vector& x) -> Vector { return Mc * x; },
      [Mc](const Vector&) -> Matrix { return Mc; });
}

Vector VectorMap::evaluate_raw(const Vector& x) const {
  if (x.size() != dim_in_) throw std::invalid_argument("VectorMap: input dimension mismatch");
  Vector out = evaluate_(x);
  if (out.size() != out_layout_.total())
    throw NumericError("VectorMap '" + id_ + "': output does not match declared layout");
  return out;
}

Matrix VectorMap::jacobian(const Vector& x) const {
  if (jacobian_) {
    Matrix J = jacobian_(x);
    if (J.rows() != out_layout_.total() || J.cols() != dim_in_)
      throw NumericError("VectorMap '" + id_ + "': Jacobian dimension mismatch");
    return J;
  }
  Matrix J(out_layout_.total(), dim_in_);
  Vector xp = x, xm = x;
  for (int k = 0; k < dim_in_; ++k) {
    const double step = 1e-6 * std::max(1.0, std::abs(x[k]));
    xp[k] = x[k] + step;
    xm[k] = x[k] - step;
    J.col(k) = (evaluate_raw(xp) - evaluate_raw(xm)) / (2.0 * step);
    xp[k] = x[k];
    xm[k] = x[k];
  }
  return J;
}

}  // namespace rse
