#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ginv/graph.hpp"
#include "ginv/permutation.hpp"

namespace ginv {

/// Sum over group elements of the product along the permuted diagonal:
/// out[c] = sum_{g in G} prod_j F[sigma_g(j), j, c], iterated in the group's
/// canonical element order. F is (n, n, c) or batched (B, n, n, c); the
/// result is (c) resp. (B, c).
///
/// mult_counter, when given, is incremented by the exact number of scalar
/// multiplications the product reduction performs: batch * |G| * (n-1) * c.
template <typename Scalar>
Var<Scalar> sigma_pi(Var<Scalar> features, const PermutationGroup& G,
                     std::uint64_t* mult_counter = nullptr) {
  const int rank = features.value().rank();
  if (rank != 3 && rank != 4) throw std::invalid_argument("sigma_pi: features must be rank 3 or 4");
  const bool batched = rank == 4;
  const Index B = batched ? features.value().dim(0) : 1;
  const Index n = features.value().dim(batched ? 1 : 0);
  const Index c = features.value().dim(batched ? 3 : 2);
  if (features.value().dim(batched ? 2 : 1) != n || n != G.degree())
    throw std::invalid_argument("sigma_pi: features " + shape_str(features.shape()) +
                                " do not match group degree " + std::to_string(G.degree()));
  const Index m = static_cast<Index>(G.order());

  // Flat (i, j) -> sigma_g(j) * n + j index table, g-major.
  std::vector<Index> idx;
  idx.reserve(static_cast<std::size_t>(m * n));
  for (const auto& g : G.elements())
    for (Index j = 0; j < n; ++j) idx.push_back(static_cast<Index>(g(static_cast<int>(j))) * n + j);

  auto flat = reshape(features, {B, n * n, c});
  auto picked = gather(flat, 1, std::move(idx));          // (B, m*n, c)
  auto grouped = reshape(picked, {B, m, n, c});
  if (mult_counter) *mult_counter += reduce_prod_mult_count(grouped.shape(), 2);
  auto products = reduce_prod(grouped, 2);                // (B, m, c)
  auto summed = reduce_sum(products, 1);                  // (B, c)
  return batched ? summed : reshape(summed, {c});
}

/// Literal two-loop evaluation of the same sum; test oracle only.
template <typename Scalar>
std::vector<Scalar> sigma_pi_naive(const Tensor<Scalar>& features, const PermutationGroup& G) {
  if (features.rank() != 3) throw std::invalid_argument("sigma_pi_naive: features must be rank 3");
  const Index n = features.dim(0), c = features.dim(2);
  if (features.dim(1) != n || n != G.degree())
    throw std::invalid_argument("sigma_pi_naive: shape does not match group degree");
  std::vector<Scalar> out(static_cast<std::size_t>(c), Scalar(0));
  for (Index ch = 0; ch < c; ++ch) {
    Scalar acc = 0;
    for (const auto& g : G.elements()) {
      Scalar prod = 1;
      for (Index j = 0; j < n; ++j)
        prod *= features.at({static_cast<Index>(g(static_cast<int>(j))), j, ch});
      acc += prod;
    }
    out[static_cast<std::size_t>(ch)] = acc;
  }
  return out;
}

/// The G-invariant sum-product layer with its multiplication tally.
template <typename Scalar>
struct SigmaPiLayer {
  PermutationGroup group;
  Index n_mid;
  mutable std::uint64_t mult_count = 0;

  SigmaPiLayer(PermutationGroup g, Index nm) : group(std::move(g)), n_mid(nm) {}

  Var<Scalar> operator()(Var<Scalar> features) const {
    return sigma_pi(std::move(features), group, &mult_count);
  }
};

/// Applies a shared per-row map phi to every row of x and reshapes the
/// n*n_mid-wide row outputs into the (.., n, n, n_mid) feature tensor whose
/// entry [i, j, :] is phi_j(x_i). phi: (Graph&, Var (rows, n_in)) ->
/// Var (rows, n * n_mid).
template <typename Scalar, typename Phi>
Var<Scalar> f_in_forward(Graph<Scalar>& g, Phi&& phi, Var<Scalar> x, Index n_mid) {
  const int rank = x.value().rank();
  if (rank != 2 && rank != 3) throw std::invalid_argument("f_in_forward: input must be rank 2 or 3");
  const bool batched = rank == 3;
  const Index B = batched ? x.value().dim(0) : 1;
  const Index n = x.value().dim(batched ? 1 : 0);
  const Index n_in = x.value().dim(batched ? 2 : 1);

  auto rows = reshape(x, {B * n, n_in});
  Var<Scalar> feats = phi(g, rows);
  if (feats.value().rank() != 2 || feats.value().dim(0) != B * n || feats.value().dim(1) != n * n_mid)
    throw std::invalid_argument("f_in_forward: phi output must be (rows, n*n_mid), got " +
                                shape_str(feats.shape()));
  return batched ? reshape(feats, {B, n, n, n_mid}) : reshape(feats, {n, n, n_mid});
}

/// Prepends the last (k-1)/2 rows and appends the first (k-1)/2 rows along
/// the row axis, so a valid k-convolution afterwards yields length n again.
template <typename Scalar>
Var<Scalar> circular_pad(Var<Scalar> x, Index k) {
  const int rank = x.value().rank();
  if (rank != 2 && rank != 3) throw std::invalid_argument("circular_pad: input must be rank 2 or 3");
  const int axis = rank - 2;
  const Index n = x.value().dim(axis);
  if (k < 1 || k % 2 == 0) throw std::invalid_argument("circular_pad: kernel size must be odd");
  if (k > n + 1) throw std::invalid_argument("circular_pad: kernel size exceeds n + 1");
  const Index h = (k - 1) / 2;
  std::vector<Index> idx;
  idx.reserve(static_cast<std::size_t>(n + k - 1));
  for (Index i = n - h; i < n; ++i) idx.push_back(i);
  for (Index i = 0; i < n; ++i) idx.push_back(i);
  for (Index i = 0; i < h; ++i) idx.push_back(i);
  return gather(std::move(x), axis, std::move(idx));
}

/// Group averaging: mean over all g in G of model(act_on_rows(g, x)),
/// differentiable through every branch. model: (Var) -> Var.
template <typename Scalar, typename Inner>
Var<Scalar> reynolds_average(const PermutationGroup& G, Var<Scalar> x, Inner&& model) {
  Var<Scalar> acc;
  for (const auto& e : G.elements()) {
    Var<Scalar> branch = model(act_on_rows(x, e));
    acc = acc ? add(acc, branch) : branch;
  }
  return scale(acc, Scalar(1) / static_cast<Scalar>(G.order()));
}

}  // namespace ginv
