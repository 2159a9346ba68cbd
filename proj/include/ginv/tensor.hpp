#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ginv/permutation.hpp"
#include "ginv/rng.hpp"

namespace ginv {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

inline Index shape_size(const Shape& s) {
  Index n = 1;
  for (Index d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < s.size(); ++i) out << (i ? "," : "") << s[i];
  out << ')';
  return out.str();
}

/// Splits a shape at `axis` into (outer, len, inner) extents for row-major
/// traversal: flat = (o * len + l) * inner + i.
inline void axis_extents(const Shape& s, int axis, Index& outer, Index& len, Index& inner) {
  if (axis < 0 || axis >= static_cast<int>(s.size()))
    throw std::invalid_argument("axis " + std::to_string(axis) + " invalid for shape " + shape_str(s));
  outer = 1;
  for (int a = 0; a < axis; ++a) outer *= s[static_cast<std::size_t>(a)];
  len = s[static_cast<std::size_t>(axis)];
  inner = 1;
  for (std::size_t a = static_cast<std::size_t>(axis) + 1; a < s.size(); ++a) inner *= s[a];
}

/// Dense row-major tensor. Doubles as an autodiff leaf: when requires_grad
/// is set, backward() accumulates into `grad`.
template <typename Scalar>
class Tensor {
 public:
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using RowMajorMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using MatrixMap = Eigen::Map<RowMajorMatrix>;
  using ConstMatrixMap = Eigen::Map<const RowMajorMatrix>;

  Tensor() = default;
  explicit Tensor(Shape shape) : shape_(std::move(shape)), data_(Array::Zero(shape_size(shape_))) {}
  Tensor(Shape shape, Array data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (data_.size() != shape_size(shape_))
      throw std::invalid_argument("tensor: data length does not match shape " + shape_str(shape_));
  }

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

  static Tensor full(Shape shape, Scalar v) {
    Tensor t(std::move(shape));
    t.data_.setConstant(v);
    return t;
  }

  static Tensor of(Shape shape, std::initializer_list<Scalar> values) {
    Tensor t(std::move(shape));
    if (static_cast<Index>(values.size()) != t.size())
      throw std::invalid_argument("tensor: initializer size mismatch");
    Index i = 0;
    for (Scalar v : values) t.data_[i++] = v;
    return t;
  }

  static Tensor uniform(Shape shape, Rng& rng, double lo = 0.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    for (Index i = 0; i < t.size(); ++i) t.data_[i] = static_cast<Scalar>(rng.uniform(lo, hi));
    return t;
  }

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  Index size() const { return data_.size(); }
  Index dim(int axis) const { return shape_[static_cast<std::size_t>(axis)]; }

  Array& data() { return data_; }
  const Array& data() const { return data_; }
  Scalar& operator[](Index i) { return data_[i]; }
  Scalar operator[](Index i) const { return data_[i]; }

  /// Row-major multi-index access (bounds unchecked beyond rank).
  Scalar at(std::initializer_list<Index> idx) const {
    if (static_cast<int>(idx.size()) != rank()) throw std::invalid_argument("at: rank mismatch");
    Index flat = 0;
    int a = 0;
    for (Index i : idx) flat = flat * shape_[static_cast<std::size_t>(a)] + i, ++a;
    return data_[flat];
  }

  Tensor reshaped(Shape shape) const {
    if (shape_size(shape) != size())
      throw std::invalid_argument("reshape: element count mismatch " + shape_str(shape_) + " -> " +
                                  shape_str(shape));
    return Tensor(std::move(shape), data_);
  }

  ConstMatrixMap as_matrix(Index rows, Index cols) const {
    if (rows * cols != size()) throw std::invalid_argument("as_matrix: size mismatch");
    return ConstMatrixMap(data_.data(), rows, cols);
  }
  MatrixMap as_matrix(Index rows, Index cols) {
    if (rows * cols != size()) throw std::invalid_argument("as_matrix: size mismatch");
    return MatrixMap(data_.data(), rows, cols);
  }

  template <typename S2>
  Tensor<S2> cast() const {
    typename Tensor<S2>::Array d = data_.template cast<S2>();
    return Tensor<S2>(shape_, std::move(d));
  }

  // --- autodiff leaf state ---
  bool requires_grad = false;
  Array grad;

  void ensure_grad() {
    if (grad.size() != data_.size()) grad = Array::Zero(data_.size());
  }
  void zero_grad() {
    if (grad.size() > 0) grad.setZero();
  }

 private:
  Shape shape_;
  Array data_;
};

/// Value-level row gather: result[.., i, :] = x[.., sigma(i), :], acting on
/// the second-to-last axis for rank >= 2 (rows of one item), axis 0 for
/// rank 1.
template <typename Scalar>
Tensor<Scalar> act_on_rows(const Permutation& p, const Tensor<Scalar>& x) {
  int axis = x.rank() >= 2 ? x.rank() - 2 : 0;
  Index outer, len, inner;
  axis_extents(x.shape(), axis, outer, len, inner);
  if (len != p.degree())
    throw std::invalid_argument("act_on_rows: degree " + std::to_string(p.degree()) +
                                " does not match extent " + std::to_string(len));
  Tensor<Scalar> y(x.shape());
  for (Index o = 0; o < outer; ++o)
    for (Index i = 0; i < len; ++i) {
      Index src = (o * len + p(static_cast<int>(i))) * inner;
      Index dst = (o * len + i) * inner;
      y.data().segment(dst, inner) = x.data().segment(src, inner);
    }
  return y;
}

}  // namespace ginv
