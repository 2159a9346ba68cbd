#pragma once

#include <cmath>
#include <deque>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ginv/tensor.hpp"

namespace ginv {

template <typename Scalar>
class Graph;

/// Lightweight handle to a node on a Graph's tape.
template <typename Scalar>
class Var {
 public:
  Var() = default;
  Var(Graph<Scalar>* g, Index id) : g_(g), id_(id) {}

  const Tensor<Scalar>& value() const;
  const Shape& shape() const { return value().shape(); }
  Index id() const { return id_; }
  Graph<Scalar>* graph() const { return g_; }
  explicit operator bool() const { return g_ != nullptr; }

 private:
  Graph<Scalar>* g_ = nullptr;
  Index id_ = -1;
};

/// Tape of recorded operations in execution order. backward() sweeps the
/// tape in reverse; every node's gradient accumulates (+=) from all of its
/// consumers before its own backward function runs.
template <typename Scalar>
class Graph {
 public:
  using Array = typename Tensor<Scalar>::Array;
  using BackFn = std::function<void(Graph&)>;

  struct Node {
    Tensor<Scalar> value;
    Array grad;  // allocated lazily
    bool needs_grad = false;
    Tensor<Scalar>* leaf = nullptr;  // set for bound parameter leaves
    BackFn backward;
  };

  /// When false, ops compute values only (no backward closures); used for
  /// evaluation and timing passes.
  bool recording = true;

  /// Binds an external tensor as a leaf. The value is copied; gradients
  /// accumulate back into t.grad when t.requires_grad is set.
  Var<Scalar> leaf(Tensor<Scalar>& t) {
    Node node;
    node.value = t;
    node.needs_grad = recording && t.requires_grad;
    node.leaf = node.needs_grad ? &t : nullptr;
    nodes_.push_back(std::move(node));
    return Var<Scalar>(this, static_cast<Index>(nodes_.size()) - 1);
  }

  Var<Scalar> constant(Tensor<Scalar> t) {
    Node node;
    node.value = std::move(t);
    nodes_.push_back(std::move(node));
    return Var<Scalar>(this, static_cast<Index>(nodes_.size()) - 1);
  }

  /// Creates a result node. `wants_grad` should be the OR of the parents'
  /// needs_grad; the backward closure is installed only when recording.
  Var<Scalar> result(Tensor<Scalar> value, bool wants_grad) {
    Node node;
    node.value = std::move(value);
    node.needs_grad = recording && wants_grad;
    nodes_.push_back(std::move(node));
    return Var<Scalar>(this, static_cast<Index>(nodes_.size()) - 1);
  }

  void set_backward(const Var<Scalar>& v, BackFn fn) {
    Node& n = node(v.id());
    if (n.needs_grad) n.backward = std::move(fn);
  }

  Node& node(Index id) { return nodes_[static_cast<std::size_t>(id)]; }
  const Node& node(Index id) const { return nodes_[static_cast<std::size_t>(id)]; }
  const Tensor<Scalar>& value(Index id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool needs_grad(Index id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }

  /// Gradient buffer of a node, zero-initialized on first access.
  Array& grad(Index id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.size() != n.value.size()) n.grad = Array::Zero(n.value.size());
    return n.grad;
  }

  void backward(const Var<Scalar>& loss) {
    if (loss.graph() != this) throw std::invalid_argument("backward: var belongs to another graph");
    if (loss.value().size() != 1) throw std::invalid_argument("backward: loss must be scalar");
    if (!node(loss.id()).needs_grad)
      throw std::invalid_argument("backward: loss does not depend on any differentiable leaf");
    grad(loss.id()).setConstant(Scalar(1));
    for (Index id = loss.id(); id >= 0; --id) {
      Node& n = nodes_[static_cast<std::size_t>(id)];
      if (!n.needs_grad || n.grad.size() == 0) continue;  // off the loss path
      if (n.backward) n.backward(*this);
      if (n.leaf) {
        n.leaf->ensure_grad();
        n.leaf->grad += n.grad;
      }
    }
  }

  std::size_t node_count() const { return nodes_.size(); }

 private:
  std::deque<Node> nodes_;  // deque keeps node addresses stable
};

template <typename Scalar>
const Tensor<Scalar>& Var<Scalar>::value() const {
  return g_->value(id_);
}

template <typename Scalar>
Scalar scalar_value(const Var<Scalar>& v) {
  if (v.value().size() != 1) throw std::invalid_argument("scalar_value: not a scalar");
  return v.value()[0];
}

namespace detail {

template <typename Scalar>
Graph<Scalar>& same_graph(const Var<Scalar>& a, const Var<Scalar>& b) {
  if (a.graph() != b.graph()) throw std::invalid_argument("op: vars belong to different graphs");
  return *a.graph();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// shape plumbing
// ---------------------------------------------------------------------------

template <typename Scalar>
Var<Scalar> reshape(Var<Scalar> x, Shape shape) {
  Graph<Scalar>& g = *x.graph();
  if (shape_size(shape) != x.value().size())
    throw std::invalid_argument("reshape: element count mismatch " + shape_str(x.shape()) + " -> " +
                                shape_str(shape));
  Index xid = x.id();
  Var<Scalar> out = g.result(Tensor<Scalar>(std::move(shape), x.value().data()), g.needs_grad(xid));
  Index yid = out.id();
  g.set_backward(out, [xid, yid](Graph<Scalar>& gr) { gr.grad(xid) += gr.grad(yid); });
  return out;
}

/// Gathers slices along `axis`: y[.., k, ..] = x[.., indices[k], ..].
/// Backward is scatter-add, so repeated indices accumulate.
template <typename Scalar>
Var<Scalar> gather(Var<Scalar> x, int axis, std::vector<Index> indices) {
  Graph<Scalar>& g = *x.graph();
  Index outer, len, inner;
  axis_extents(x.shape(), axis, outer, len, inner);
  for (Index i : indices)
    if (i < 0 || i >= len)
      throw std::invalid_argument("gather: index " + std::to_string(i) + " out of range [0," +
                                  std::to_string(len) + ")");
  Shape yshape = x.shape();
  yshape[static_cast<std::size_t>(axis)] = static_cast<Index>(indices.size());
  Tensor<Scalar> y(yshape);
  const Index t = static_cast<Index>(indices.size());
  for (Index o = 0; o < outer; ++o)
    for (Index k = 0; k < t; ++k)
      y.data().segment((o * t + k) * inner, inner) =
          x.value().data().segment((o * len + indices[static_cast<std::size_t>(k)]) * inner, inner);

  Var<Scalar> out = g.result(std::move(y), g.needs_grad(x.id()));
  Index xid = x.id(), yid = out.id();
  g.set_backward(out, [xid, yid, axis, idx = std::move(indices)](Graph<Scalar>& gr) {
    Index o2, len2, in2;
    axis_extents(gr.value(xid).shape(), axis, o2, len2, in2);
    const Index t2 = static_cast<Index>(idx.size());
    auto& dx = gr.grad(xid);
    const auto& dy = gr.grad(yid);
    for (Index o = 0; o < o2; ++o)
      for (Index k = 0; k < t2; ++k)
        dx.segment((o * len2 + idx[static_cast<std::size_t>(k)]) * in2, in2) +=
            dy.segment((o * t2 + k) * in2, in2);
  });
  return out;
}

/// Axis-0 gather (the row form used by the group action).
template <typename Scalar>
Var<Scalar> gather_rows(Var<Scalar> x, std::vector<Index> indices) {
  return gather(std::move(x), 0, std::move(indices));
}

/// Row permutation on the second-to-last axis (axis 0 for rank-1/2 input):
/// result[.., i, :] = x[.., sigma(i), :].
template <typename Scalar>
Var<Scalar> act_on_rows(Var<Scalar> x, const Permutation& p) {
  int axis = x.value().rank() >= 2 ? x.value().rank() - 2 : 0;
  if (x.value().dim(axis) != p.degree())
    throw std::invalid_argument("act_on_rows: shape " + shape_str(x.shape()) +
                                " does not match degree " + std::to_string(p.degree()));
  std::vector<Index> idx(p.mapping().begin(), p.mapping().end());
  return gather(std::move(x), axis, std::move(idx));
}

// ---------------------------------------------------------------------------
// elementwise and scalar ops
// ---------------------------------------------------------------------------

template <typename Scalar>
Var<Scalar> add(Var<Scalar> a, Var<Scalar> b) {
  Graph<Scalar>& g = detail::same_graph(a, b);
  if (a.shape() != b.shape())
    throw std::invalid_argument("add: shape mismatch " + shape_str(a.shape()) + " vs " +
                                shape_str(b.shape()));
  Tensor<Scalar> y(a.shape(), a.value().data() + b.value().data());
  Var<Scalar> out = g.result(std::move(y), g.needs_grad(a.id()) || g.needs_grad(b.id()));
  Index aid = a.id(), bid = b.id(), yid = out.id();
  g.set_backward(out, [aid, bid, yid](Graph<Scalar>& gr) {
    if (gr.needs_grad(aid)) gr.grad(aid) += gr.grad(yid);
    if (gr.needs_grad(bid)) gr.grad(bid) += gr.grad(yid);
  });
  return out;
}

template <typename Scalar>
Var<Scalar> sub(Var<Scalar> a, Var<Scalar> b) {
  Graph<Scalar>& g = detail::same_graph(a, b);
  if (a.shape() != b.shape())
    throw std::invalid_argument("sub: shape mismatch " + shape_str(a.shape()) + " vs " +
                                shape_str(b.shape()));
  Tensor<Scalar> y(a.shape(), a.value().data() - b.value().data());
  Var<Scalar> out = g.result(std::move(y), g.needs_grad(a.id()) || g.needs_grad(b.id()));
  Index aid = a.id(), bid = b.id(), yid = out.id();
  g.set_backward(out, [aid, bid, yid](Graph<Scalar>& gr) {
    if (gr.needs_grad(aid)) gr.grad(aid) += gr.grad(yid);
    if (gr.needs_grad(bid)) gr.grad(bid) -= gr.grad(yid);
  });
  return out;
}

template <typename Scalar>
Var<Scalar> scale(Var<Scalar> x, Scalar factor) {
  Graph<Scalar>& g = *x.graph();
  Tensor<Scalar> y(x.shape(), x.value().data() * factor);
  Var<Scalar> out = g.result(std::move(y), g.needs_grad(x.id()));
  Index xid = x.id(), yid = out.id();
  g.set_backward(out, [xid, yid, factor](Graph<Scalar>& gr) { gr.grad(xid) += factor * gr.grad(yid); });
  return out;
}

template <typename Scalar>
Var<Scalar> tanh_act(Var<Scalar> x) {
  Graph<Scalar>& g = *x.graph();
  Tensor<Scalar> y(x.shape(), x.value().data().tanh());
  Var<Scalar> out = g.result(std::move(y), g.needs_grad(x.id()));
  Index xid = x.id(), yid = out.id();
  g.set_backward(out, [xid, yid](Graph<Scalar>& gr) {
    const auto& yv = gr.value(yid).data();
    gr.grad(xid) += gr.grad(yid) * (Scalar(1) - yv.square());
  });
  return out;
}

template <typename Scalar>
Var<Scalar> abs_val(Var<Scalar> x) {
  Graph<Scalar>& g = *x.graph();
  Tensor<Scalar> y(x.shape(), x.value().data().abs());
  Var<Scalar> out = g.result(std::move(y), g.needs_grad(x.id()));
  Index xid = x.id(), yid = out.id();
  g.set_backward(out, [xid, yid](Graph<Scalar>& gr) {
    const auto& xv = gr.value(xid).data();
    gr.grad(xid) += gr.grad(yid) * xv.sign();
  });
  return out;
}

template <typename Scalar>
Var<Scalar> mean_all(Var<Scalar> x) {
  Graph<Scalar>& g = *x.graph();
  Tensor<Scalar> y = Tensor<Scalar>::full({1}, x.value().data().mean());
  Var<Scalar> out = g.result(std::move(y), g.needs_grad(x.id()));
  Index xid = x.id(), yid = out.id();
  g.set_backward(out, [xid, yid](Graph<Scalar>& gr) {
    Scalar d = gr.grad(yid)[0] / static_cast<Scalar>(gr.value(xid).size());
    gr.grad(xid) += d;
  });
  return out;
}

template <typename Scalar>
Var<Scalar> sum_all(Var<Scalar> x) {
  Graph<Scalar>& g = *x.graph();
  Tensor<Scalar> y = Tensor<Scalar>::full({1}, x.value().data().sum());
  Var<Scalar> out = g.result(std::move(y), g.needs_grad(x.id()));
  Index xid = x.id(), yid = out.id();
  g.set_backward(out, [xid, yid](Graph<Scalar>& gr) { gr.grad(xid) += gr.grad(yid)[0]; });
  return out;
}

/// Sum of squared entries, as a {1}-shaped tensor.
template <typename Scalar>
Var<Scalar> sum_squares(Var<Scalar> x) {
  Graph<Scalar>& g = *x.graph();
  Tensor<Scalar> y = Tensor<Scalar>::full({1}, x.value().data().square().sum());
  Var<Scalar> out = g.result(std::move(y), g.needs_grad(x.id()));
  Index xid = x.id(), yid = out.id();
  g.set_backward(out, [xid, yid](Graph<Scalar>& gr) {
    gr.grad(xid) += Scalar(2) * gr.grad(yid)[0] * gr.value(xid).data();
  });
  return out;
}

// ---------------------------------------------------------------------------
// linear maps
// ---------------------------------------------------------------------------

/// y = x W + b, broadcast over all leading dims of x: x (.. x p), W (p x q),
/// b (q) -> y (.. x q).
template <typename Scalar>
Var<Scalar> affine(Var<Scalar> x, Var<Scalar> W, Var<Scalar> b) {
  Graph<Scalar>& g = detail::same_graph(x, W);
  detail::same_graph(W, b);
  if (W.value().rank() != 2 || b.value().rank() != 1)
    throw std::invalid_argument("affine: W must be rank 2 and b rank 1");
  const Index p = W.value().dim(0), q = W.value().dim(1);
  if (b.value().dim(0) != q) throw std::invalid_argument("affine: bias length mismatch");
  if (x.value().rank() < 1 || x.value().dim(x.value().rank() - 1) != p)
    throw std::invalid_argument("affine: inner dims mismatch " + shape_str(x.shape()) + " vs W " +
                                shape_str(W.shape()));
  const Index rows = x.value().size() / p;

  Shape yshape = x.shape();
  yshape.back() = q;
  Tensor<Scalar> y(yshape);
  y.as_matrix(rows, q).noalias() = x.value().as_matrix(rows, p) * W.value().as_matrix(p, q);
  y.as_matrix(rows, q).rowwise() +=
      Eigen::Map<const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>(b.value().data().data(), q);

  bool wants = g.needs_grad(x.id()) || g.needs_grad(W.id()) || g.needs_grad(b.id());
  Var<Scalar> out = g.result(std::move(y), wants);
  Index xid = x.id(), wid = W.id(), bid = b.id(), yid = out.id();
  g.set_backward(out, [xid, wid, bid, yid, rows, p, q](Graph<Scalar>& gr) {
    using CMap = typename Tensor<Scalar>::ConstMatrixMap;
    using Map = typename Tensor<Scalar>::MatrixMap;
    CMap dY(gr.grad(yid).data(), rows, q);
    if (gr.needs_grad(xid)) {
      Map dX(gr.grad(xid).data(), rows, p);
      dX.noalias() += dY * gr.value(wid).as_matrix(p, q).transpose();
    }
    if (gr.needs_grad(wid)) {
      Map dW(gr.grad(wid).data(), p, q);
      dW.noalias() += gr.value(xid).as_matrix(rows, p).transpose() * dY;
    }
    if (gr.needs_grad(bid)) {
      Eigen::Map<Eigen::Matrix<Scalar, 1, Eigen::Dynamic>> db(gr.grad(bid).data(), q);
      db += dY.colwise().sum();
    }
  });
  return out;
}

/// Valid cross-correlation along the length axis. x (L x c_in) or
/// (B x L x c_in); kernels (k x c_in x c_out); b (c_out). Output length
/// L - k + 1.
template <typename Scalar>
Var<Scalar> conv1d_valid(Var<Scalar> x, Var<Scalar> kernels, Var<Scalar> b) {
  Graph<Scalar>& g = detail::same_graph(x, kernels);
  detail::same_graph(kernels, b);
  if (kernels.value().rank() != 3 || b.value().rank() != 1)
    throw std::invalid_argument("conv1d: kernels must be rank 3 and b rank 1");
  const int xrank = x.value().rank();
  if (xrank != 2 && xrank != 3) throw std::invalid_argument("conv1d: input must be rank 2 or 3");
  const Index batch = xrank == 3 ? x.value().dim(0) : 1;
  const Index L = x.value().dim(xrank - 2);
  const Index cin = x.value().dim(xrank - 1);
  const Index k = kernels.value().dim(0), cout = kernels.value().dim(2);
  if (kernels.value().dim(1) != cin) throw std::invalid_argument("conv1d: channel mismatch");
  if (b.value().dim(0) != cout) throw std::invalid_argument("conv1d: bias length mismatch");
  if (L < k)
    throw std::invalid_argument("conv1d: input length " + std::to_string(L) + " < kernel size " +
                                std::to_string(k));
  const Index Lout = L - k + 1;

  using CMap = typename Tensor<Scalar>::ConstMatrixMap;
  using Map = typename Tensor<Scalar>::MatrixMap;
  using Array = typename Tensor<Scalar>::Array;

  // Rows (bt*L+d .. bt*L+d+Lout-1) are contiguous, so the shifted input for
  // one kernel offset assembles with one block copy per batch item and the
  // whole offset contribution becomes a single GEMM.
  auto gather_offset = [](const Array& src, Array& dst, Index d, Index batch_, Index L_, Index Lout_,
                          Index cin_) {
    for (Index bt = 0; bt < batch_; ++bt)
      dst.segment(bt * Lout_ * cin_, Lout_ * cin_) = src.segment((bt * L_ + d) * cin_, Lout_ * cin_);
  };

  Shape yshape = xrank == 3 ? Shape{batch, Lout, cout} : Shape{Lout, cout};
  Tensor<Scalar> y(yshape);
  {
    Map Y(y.data().data(), batch * Lout, cout);
    Y.rowwise() = Eigen::Map<const Eigen::Matrix<Scalar, 1, Eigen::Dynamic>>(b.value().data().data(), cout);
    Array scratch(batch * Lout * cin);
    for (Index d = 0; d < k; ++d) {
      CMap Kd(kernels.value().data().data() + d * cin * cout, cin, cout);
      if (k == 1) {
        CMap X0(x.value().data().data(), batch * Lout, cin);
        Y.noalias() += X0 * Kd;
      } else {
        gather_offset(x.value().data(), scratch, d, batch, L, Lout, cin);
        CMap Xd(scratch.data(), batch * Lout, cin);
        Y.noalias() += Xd * Kd;
      }
    }
  }

  bool wants = g.needs_grad(x.id()) || g.needs_grad(kernels.id()) || g.needs_grad(b.id());
  Var<Scalar> out = g.result(std::move(y), wants);
  Index xid = x.id(), kid = kernels.id(), bid = b.id(), yid = out.id();
  g.set_backward(out, [xid, kid, bid, yid, batch, L, cin, k, cout, Lout,
                       gather_offset](Graph<Scalar>& gr) {
    CMap dY(gr.grad(yid).data(), batch * Lout, cout);
    if (gr.needs_grad(bid)) {
      Eigen::Map<Eigen::Matrix<Scalar, 1, Eigen::Dynamic>> db(gr.grad(bid).data(), cout);
      db += dY.colwise().sum();
    }
    Array scratch(batch * Lout * cin);
    for (Index d = 0; d < k; ++d) {
      CMap Kd(gr.value(kid).data().data() + d * cin * cout, cin, cout);
      if (gr.needs_grad(xid)) {
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> dXd = dY * Kd.transpose();
        auto& dx = gr.grad(xid);
        for (Index bt = 0; bt < batch; ++bt)
          Eigen::Map<Array>(dx.data() + (bt * L + d) * cin, Lout * cin) +=
              Eigen::Map<const Array>(dXd.data() + bt * Lout * cin, Lout * cin);
      }
      if (gr.needs_grad(kid)) {
        gather_offset(gr.value(xid).data(), scratch, d, batch, L, Lout, cin);
        CMap Xd(scratch.data(), batch * Lout, cin);
        Map dKd(gr.grad(kid).data() + d * cin * cout, cin, cout);
        dKd.noalias() += Xd.transpose() * dY;
      }
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// reductions
// ---------------------------------------------------------------------------

template <typename Scalar>
Var<Scalar> reduce_sum(Var<Scalar> x, int axis) {
  Graph<Scalar>& g = *x.graph();
  Index outer, len, inner;
  axis_extents(x.shape(), axis, outer, len, inner);
  Shape yshape = x.shape();
  yshape.erase(yshape.begin() + axis);
  if (yshape.empty()) yshape = {1};
  Tensor<Scalar> y(yshape);
  for (Index o = 0; o < outer; ++o) {
    auto dst = y.data().segment(o * inner, inner);
    for (Index l = 0; l < len; ++l) dst += x.value().data().segment((o * len + l) * inner, inner);
  }
  Var<Scalar> out = g.result(std::move(y), g.needs_grad(x.id()));
  Index xid = x.id(), yid = out.id();
  g.set_backward(out, [xid, yid, outer, len, inner](Graph<Scalar>& gr) {
    auto& dx = gr.grad(xid);
    const auto& dy = gr.grad(yid);
    for (Index o = 0; o < outer; ++o)
      for (Index l = 0; l < len; ++l)
        dx.segment((o * len + l) * inner, inner) += dy.segment(o * inner, inner);
  });
  return out;
}

/// Product along `axis`. The gradient uses leave-one-out prefix/suffix
/// products rather than division, so zero factors are handled exactly.
template <typename Scalar>
Var<Scalar> reduce_prod(Var<Scalar> x, int axis) {
  Graph<Scalar>& g = *x.graph();
  Index outer, len, inner;
  axis_extents(x.shape(), axis, outer, len, inner);
  Shape yshape = x.shape();
  yshape.erase(yshape.begin() + axis);
  if (yshape.empty()) yshape = {1};
  Tensor<Scalar> y(yshape);
  for (Index o = 0; o < outer; ++o) {
    auto dst = y.data().segment(o * inner, inner);
    dst = x.value().data().segment(o * len * inner, inner);
    for (Index l = 1; l < len; ++l) dst *= x.value().data().segment((o * len + l) * inner, inner);
  }
  Var<Scalar> out = g.result(std::move(y), g.needs_grad(x.id()));
  Index xid = x.id(), yid = out.id();
  g.set_backward(out, [xid, yid, outer, len, inner](Graph<Scalar>& gr) {
    using A = typename Tensor<Scalar>::Array;
    const auto& xv = gr.value(xid).data();
    auto& dx = gr.grad(xid);
    const auto& dy = gr.grad(yid);
    A prefix((len + 1) * inner), suffix((len + 1) * inner);
    for (Index o = 0; o < outer; ++o) {
      prefix.segment(0, inner).setOnes();
      for (Index l = 0; l < len; ++l)
        prefix.segment((l + 1) * inner, inner) =
            prefix.segment(l * inner, inner) * xv.segment((o * len + l) * inner, inner);
      suffix.segment(len * inner, inner).setOnes();
      for (Index l = len - 1; l >= 0; --l)
        suffix.segment(l * inner, inner) =
            suffix.segment((l + 1) * inner, inner) * xv.segment((o * len + l) * inner, inner);
      for (Index l = 0; l < len; ++l)
        dx.segment((o * len + l) * inner, inner) += dy.segment(o * inner, inner) *
                                                    prefix.segment(l * inner, inner) *
                                                    suffix.segment((l + 1) * inner, inner);
    }
  });
  return out;
}

/// Scalar multiplications performed by one reduce_prod over this shape.
inline std::uint64_t reduce_prod_mult_count(const Shape& s, int axis) {
  Index outer, len, inner;
  axis_extents(s, axis, outer, len, inner);
  return static_cast<std::uint64_t>(outer) * static_cast<std::uint64_t>(inner) *
         static_cast<std::uint64_t>(len > 0 ? len - 1 : 0);
}

}  // namespace ginv
