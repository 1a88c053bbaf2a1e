#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace rse {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Sizes (n_1,...,n_p) of a partitioned vector space R^{n_1} x ... x R^{n_p}.
class BlockLayout {
 public:
  BlockLayout() = default;

  explicit BlockLayout(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.empty()) throw std::invalid_argument("BlockLayout: needs at least one block");
    offsets_.reserve(sizes_.size());
    total_ = 0;
    for (int s : sizes_) {
      if (s < 1) throw std::invalid_argument("BlockLayout: block sizes must be positive");
      offsets_.push_back(total_);
      total_ += s;
    }
  }

  static BlockLayout uniform(int p, int block_size = 1) {
    return BlockLayout(std::vector<int>(static_cast<std::size_t>(p), block_size));
  }

  int block_count() const { return static_cast<int>(sizes_.size()); }
  int total() const { return total_; }

  // Block indices are 1-based throughout, matching sensor numbering.
  int size(int block) const { return sizes_.at(static_cast<std::size_t>(block - 1)); }
  int offset(int block) const { return offsets_.at(static_cast<std::size_t>(block - 1)); }

  const std::vector<int>& sizes() const { return sizes_; }

  bool operator==(const BlockLayout& other) const { return sizes_ == other.sizes_; }
  bool operator!=(const BlockLayout& other) const { return !(*this == other); }

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  int total_ = 0;
};

/// Strictly increasing subset of {1,...,p}.
class IndexSet {
 public:
  IndexSet() = default;

  explicit IndexSet(std::vector<int> indices) : indices_(std::move(indices)) {
    for (std::size_t k = 0; k < indices_.size(); ++k) {
      if (indices_[k] < 1) throw std::invalid_argument("IndexSet: indices are 1-based");
      if (k > 0 && indices_[k] <= indices_[k - 1])
        throw std::invalid_argument("IndexSet: indices must be strictly increasing");
    }
  }

  IndexSet(std::initializer_list<int> indices) : IndexSet(std::vector<int>(indices)) {}

  static IndexSet full(int p) {
    std::vector<int> v(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) v[static_cast<std::size_t>(i)] = i + 1;
    return IndexSet(std::move(v));
  }

  int size() const { return static_cast<int>(indices_.size()); }
  bool empty() const { return indices_.empty(); }
  int at(int pos) const { return indices_.at(static_cast<std::size_t>(pos)); }
  const std::vector<int>& indices() const { return indices_; }

  bool contains(int i) const {
    return std::binary_search(indices_.begin(), indices_.end(), i);
  }

  int max_index() const { return indices_.empty() ? 0 : indices_.back(); }

  IndexSet complement(int p) const {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(p - size()));
    for (int i = 1; i <= p; ++i)
      if (!contains(i)) out.push_back(i);
    return IndexSet(std::move(out));
  }

  bool intersects(const IndexSet& other) const {
    for (int i : indices_)
      if (other.contains(i)) return true;
    return false;
  }

  bool operator==(const IndexSet& other) const { return indices_ == other.indices_; }
  bool operator!=(const IndexSet& other) const { return !(*this == other); }
  bool operator<(const IndexSet& other) const { return indices_ < other.indices_; }

  std::string to_string() const {
    std::string s = "{";
    for (std::size_t k = 0; k < indices_.size(); ++k) {
      if (k) s += ",";
      s += std::to_string(indices_[k]);
    }
    return s + "}";
  }

 private:
  std::vector<int> indices_;
};

/// Vector in R^{(n_1,...,n_p)} with named blocks.
class PartitionedVector {
 public:
  PartitionedVector() = default;

  PartitionedVector(BlockLayout layout, Vector data)
      : layout_(std::move(layout)), data_(std::move(data)) {
    if (data_.size() != layout_.total())
      throw std::invalid_argument("PartitionedVector: data length does not match layout");
  }

  static PartitionedVector zero(const BlockLayout& layout) {
    return PartitionedVector(layout, Vector::Zero(layout.total()));
  }

  const BlockLayout& layout() const { return layout_; }
  const Vector& data() const { return data_; }
  Vector& data() { return data_; }

  Eigen::VectorBlock<const Vector> block(int i) const {
    return data_.segment(layout_.offset(i), layout_.size(i));
  }
  Eigen::VectorBlock<Vector> block(int i) {
    return data_.segment(layout_.offset(i), layout_.size(i));
  }

 private:
  BlockLayout layout_;
  Vector data_;
};

/// Max absolute entry. The paper's default vector norm.
inline double inf_norm(const Vector& v) {
  if (v.size() == 0) throw std::invalid_argument("inf_norm: empty vector");
  return v.lpNorm<Eigen::Infinity>();
}

inline double inf_norm(const PartitionedVector& v) { return inf_norm(v.data()); }

/// Number of nonzero blocks, i.e. the block-wise l0 norm ||v||_0^N.
/// Nonzero-ness is exact: a block counts iff any entry differs from 0.0.
inline int nonzero_block_count(const PartitionedVector& v) {
  int count = 0;
  for (int i = 1; i <= v.layout().block_count(); ++i) {
    if ((v.block(i).array() != 0.0).any()) ++count;
  }
  return count;
}

inline BlockLayout sub_layout(const BlockLayout& layout, const IndexSet& I) {
  if (I.empty()) throw std::invalid_argument("sub_layout: empty index set");
  if (I.max_index() > layout.block_count())
    throw std::out_of_range("sub_layout: index exceeds block count");
  std::vector<int> sizes;
  sizes.reserve(static_cast<std::size_t>(I.size()));
  for (int i : I.indices()) sizes.push_back(layout.size(i));
  return BlockLayout(std::move(sizes));
}

/// Canonical projection pi_I: keeps blocks with indices in I, in order.
inline PartitionedVector project(const PartitionedVector& v, const IndexSet& I) {
  BlockLayout sub = sub_layout(v.layout(), I);
  Vector data(sub.total());
  int at = 0;
  for (int i : I.indices()) {
    data.segment(at, v.layout().size(i)) = v.block(i);
    at += v.layout().size(i);
  }
  return PartitionedVector(std::move(sub), std::move(data));
}

/// Projection applied to a raw stacked vector with a known layout.
inline Vector project(const BlockLayout& layout, const Vector& stacked, const IndexSet& I) {
  if (stacked.size() != layout.total())
    throw std::invalid_argument("project: vector length does not match layout");
  BlockLayout sub = sub_layout(layout, I);
  Vector data(sub.total());
  int at = 0;
  for (int i : I.indices()) {
    data.segment(at, layout.size(i)) = stacked.segment(layout.offset(i), layout.size(i));
    at += layout.size(i);
  }
  return data;
}

}  // namespace rse
