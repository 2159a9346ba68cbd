#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ginv/checkpoint.hpp"
#include "ginv/graph.hpp"
#include "ginv/layers.hpp"
#include "ginv/permutation.hpp"
#include "ginv/polynomial.hpp"
#include "ginv/rng.hpp"

namespace ginv {

enum class Arch { FcGinv, ConvGinv, FcGavg, ConvGavg, Maron };
enum class Task { Poly, Area };

inline std::string to_string(Arch a) {
  switch (a) {
    case Arch::FcGinv: return "fc-ginv";
    case Arch::ConvGinv: return "conv-ginv";
    case Arch::FcGavg: return "fc-gavg";
    case Arch::ConvGavg: return "conv-gavg";
    case Arch::Maron: return "maron";
  }
  throw std::logic_error("unreachable");
}

inline Arch parse_arch(const std::string& s) {
  if (s == "fc-ginv") return Arch::FcGinv;
  if (s == "conv-ginv") return Arch::ConvGinv;
  if (s == "fc-gavg") return Arch::FcGavg;
  if (s == "conv-gavg") return Arch::ConvGavg;
  if (s == "maron") return Arch::Maron;
  throw std::invalid_argument("unknown architecture '" + s + "'");
}

inline std::string to_string(Task t) { return t == Task::Poly ? "poly" : "area"; }

inline Task parse_task(const std::string& s) {
  if (s == "poly") return Task::Poly;
  if (s == "area") return Task::Area;
  throw std::invalid_argument("unknown task '" + s + "'");
}

template <typename Scalar>
struct Param {
  std::string name;
  Tensor<Scalar> tensor;
  bool is_weight;  // false for biases; the L2 term skips those
};

/// Evaluates a fixed list of polynomials on the flattened input rows:
/// x (B, n_vars) -> (B, polys.size()). Differentiable w.r.t. x through the
/// exact polynomial gradients.
template <typename Scalar>
Var<Scalar> invariant_features(Var<Scalar> x, const std::vector<InvariantPolynomial>* polys) {
  Graph<Scalar>& g = *x.graph();
  if (x.value().rank() != 2) throw std::invalid_argument("invariant_features: input must be rank 2");
  const Index B = x.value().dim(0), nv = x.value().dim(1);
  const Index F = static_cast<Index>(polys->size());
  Tensor<Scalar> y({B, F});
  for (Index b = 0; b < B; ++b) {
    const Scalar* row = x.value().data().data() + b * nv;
    for (Index f = 0; f < F; ++f) y[b * F + f] = (*polys)[static_cast<std::size_t>(f)].eval(row, nv);
  }
  Var<Scalar> out = g.result(std::move(y), g.needs_grad(x.id()));
  Index xid = x.id(), yid = out.id();
  g.set_backward(out, [xid, yid, polys, B, nv, F](Graph<Scalar>& gr) {
    auto& dx = gr.grad(xid);
    const auto& dy = gr.grad(yid);
    const auto& xv = gr.value(xid).data();
    for (Index b = 0; b < B; ++b) {
      const Scalar* row = xv.data() + b * nv;
      Scalar* grow = dx.data() + b * nv;
      for (Index f = 0; f < F; ++f) {
        Scalar w = dy[b * F + f];
        if (w != Scalar(0)) (*polys)[static_cast<std::size_t>(f)].accumulate_grad(row, w, grow);
      }
    }
  });
  return out;
}

/// One of the five compared architectures: structure, named parameters and
/// the forward contract (B, n, n_in) -> (B, 1).
template <typename Scalar>
class Model {
 public:
  Arch kind;
  Task task;
  PermutationGroup group;
  int n = 0, n_in = 0, n_mid = 0;
  std::vector<Param<Scalar>> params;
  std::vector<std::string> plan;  // layer descriptors, for display

  // Maron: exact invariant feature set (shared, immutable after build)
  std::shared_ptr<const std::vector<InvariantPolynomial>> features;

  // instrumentation
  mutable std::uint64_t sigma_pi_mults = 0;
  mutable std::uint64_t fin_activation_scalars_per_item = 0;

  Model(Arch a, Task t, PermutationGroup g) : kind(a), task(t), group(std::move(g)) {}

  Index param_count() const {
    Index total = 0;
    for (const auto& p : params) total += p.tensor.size();
    return total;
  }

  Param<Scalar>& param(const std::string& name) {
    for (auto& p : params)
      if (p.name == name) return p;
    throw std::invalid_argument("no parameter named '" + name + "'");
  }
  const Tensor<Scalar>& param_value(const std::string& name) const {
    for (const auto& p : params)
      if (p.name == name) return p.tensor;
    throw std::invalid_argument("no parameter named '" + name + "'");
  }

  void set_requires_grad(bool on) {
    for (auto& p : params) p.tensor.requires_grad = on;
  }
  void zero_grad() {
    for (auto& p : params) p.tensor.zero_grad();
  }

  /// Forward pass; x must be (B, n, n_in).
  Var<Scalar> forward(Graph<Scalar>& g, Var<Scalar> x) {
    if (x.value().rank() != 3 || x.value().dim(1) != n || x.value().dim(2) != n_in)
      throw std::invalid_argument("forward: expected (B," + std::to_string(n) + "," +
                                  std::to_string(n_in) + "), got " + shape_str(x.shape()));
    if (x.graph() != &g) throw std::invalid_argument("forward: input belongs to another graph");
    switch (kind) {
      case Arch::FcGinv: return forward_fc_ginv(x);
      case Arch::ConvGinv: return forward_conv_ginv(x);
      case Arch::FcGavg: return forward_gavg(x, /*conv=*/false);
      case Arch::ConvGavg: return forward_gavg(x, /*conv=*/true);
      case Arch::Maron: return forward_maron(x);
    }
    throw std::logic_error("unreachable");
  }

  /// Convenience non-recording forward; returns the (B, 1) prediction.
  Tensor<Scalar> predict(const Tensor<Scalar>& x) {
    Graph<Scalar> g;
    g.recording = false;
    Tensor<Scalar> xc = x;
    xc.requires_grad = false;
    return forward(g, g.leaf(xc)).value();
  }

  std::vector<Tensor<Scalar>> snapshot() const {
    std::vector<Tensor<Scalar>> s;
    s.reserve(params.size());
    for (const auto& p : params) s.push_back(p.tensor);
    return s;
  }
  void restore(const std::vector<Tensor<Scalar>>& s) {
    if (s.size() != params.size()) throw std::invalid_argument("restore: snapshot size mismatch");
    for (std::size_t i = 0; i < s.size(); ++i) {
      bool rg = params[i].tensor.requires_grad;
      params[i].tensor = s[i];
      params[i].tensor.requires_grad = rg;
    }
  }

  void save_checkpoint_file(const std::string& path) const {
    std::vector<NamedTensor<Scalar>> records;
    records.reserve(params.size());
    for (const auto& p : params) records.push_back({p.name, p.tensor});
    save_checkpoint(path, records);
  }
  void load_checkpoint_file(const std::string& path) {
    auto records = load_checkpoint<Scalar>(path);
    if (records.size() != params.size())
      throw std::runtime_error("checkpoint: record count does not match model");
    for (std::size_t i = 0; i < records.size(); ++i) {
      auto& p = param(records[i].name);
      if (p.tensor.shape() != records[i].tensor.shape())
        throw std::runtime_error("checkpoint: shape mismatch for " + records[i].name);
      bool rg = p.tensor.requires_grad;
      p.tensor = std::move(records[i].tensor);
      p.tensor.requires_grad = rg;
    }
  }

  // --- construction helpers (used by the builders below) ---

  void add_fc(const std::string& prefix, Index in, Index out, Rng& rng) {
    params.push_back({prefix + ".weight", glorot({in, out}, in, out, rng), true});
    params.push_back({prefix + ".bias", Tensor<Scalar>::zeros({out}), false});
  }
  void add_conv(const std::string& prefix, Index k, Index cin, Index cout, Rng& rng) {
    params.push_back({prefix + ".kernel", glorot({k, cin, cout}, k * cin, k * cout, rng), true});
    params.push_back({prefix + ".bias", Tensor<Scalar>::zeros({cout}), false});
  }

 private:
  static Tensor<Scalar> glorot(Shape shape, Index fan_in, Index fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    return Tensor<Scalar>::uniform(std::move(shape), rng, -limit, limit);
  }

  Var<Scalar> fc(Var<Scalar> x, const std::string& prefix) {
    Graph<Scalar>& g = *x.graph();
    return affine(x, g.leaf(param(prefix + ".weight").tensor), g.leaf(param(prefix + ".bias").tensor));
  }
  Var<Scalar> conv(Var<Scalar> x, const std::string& prefix) {
    Graph<Scalar>& g = *x.graph();
    return conv1d_valid(x, g.leaf(param(prefix + ".kernel").tensor),
                        g.leaf(param(prefix + ".bias").tensor));
  }

  Var<Scalar> forward_fc_ginv(Var<Scalar> x) {
    const Index B = x.value().dim(0);
    auto rows = reshape(x, {B * n, static_cast<Index>(n_in)});
    auto h = tanh_act(fc(rows, "fin.fc1"));
    h = tanh_act(fc(h, "fin.fc2"));
    h = fc(h, "fin.fc3");  // linear: feeds the G-invariant latent
    auto F = reshape(h, {B, static_cast<Index>(n), static_cast<Index>(n), static_cast<Index>(n_mid)});
    fin_activation_scalars_per_item = static_cast<std::uint64_t>(n) * n * n_mid;
    auto z = sigma_pi(F, group, &sigma_pi_mults);
    z = tanh_act(fc(z, "fout.fc1"));
    return fc(z, "fout.fc2");
  }

  Var<Scalar> forward_conv_ginv(Var<Scalar> x) {
    const Index B = x.value().dim(0);
    auto p = circular_pad(x, 3);
    auto h = tanh_act(conv(p, "fin.conv1"));
    h = conv(h, "fin.conv2");  // 1x1, linear: feeds the G-invariant latent
    auto F = reshape(h, {B, static_cast<Index>(n), static_cast<Index>(n), static_cast<Index>(n_mid)});
    fin_activation_scalars_per_item = static_cast<std::uint64_t>(n) * n * n_mid;
    auto z = sigma_pi(F, group, &sigma_pi_mults);
    z = tanh_act(fc(z, "fout.fc1"));
    z = tanh_act(fc(z, "fout.fc2"));
    return fc(z, "fout.fc3");
  }

  Var<Scalar> forward_gavg(Var<Scalar> x, bool is_conv) {
    const Index B = x.value().dim(0);
    auto inner = [&](Var<Scalar> xg) -> Var<Scalar> {
      if (is_conv) {
        auto h = tanh_act(conv(circular_pad(xg, 3), "net.conv1"));
        h = tanh_act(conv(h, "net.conv2"));
        auto flatv = reshape(h, {B, h.value().size() / B});
        auto z = tanh_act(fc(flatv, "net.fc1"));
        return fc(z, "net.fc2");
      }
      auto flatv = reshape(xg, {B, static_cast<Index>(n) * n_in});
      auto z = tanh_act(fc(flatv, "net.fc1"));
      z = tanh_act(fc(z, "net.fc2"));
      if (task == Task::Poly) z = tanh_act(fc(z, "net.fc3"));
      return fc(z, task == Task::Poly ? "net.fc4" : "net.fc3");
    };
    return reynolds_average(group, x, inner);
  }

  Var<Scalar> forward_maron(Var<Scalar> x) {
    const Index B = x.value().dim(0);
    auto flatv = reshape(x, {B, static_cast<Index>(n) * n_in});
    auto feats = invariant_features(flatv, features.get());
    if (task == Task::Poly) {
      auto z = tanh_act(fc(feats, "mlp.fc1"));
      z = tanh_act(fc(z, "mlp.fc2"));
      z = tanh_act(fc(z, "mlp.fc3"));
      return fc(z, "mlp.fc4");
    }
    auto z = tanh_act(fc(feats, "mlp.fc1"));
    return fc(z, "mlp.fc2");
  }
};

// ---------------------------------------------------------------------------
// builders
// ---------------------------------------------------------------------------

/// Per-row FC trunk (n_in -> 16 -> 64 -> n*n_mid, last layer linear), then
/// the sum-product layer and the FC(n_mid -> 32 -> 1) output head.
template <typename Scalar>
Model<Scalar> build_fc_ginv(const PermutationGroup& group, int n, int n_in, int n_mid, Rng& rng,
                            Task task = Task::Poly) {
  if (group.degree() != n) throw std::invalid_argument("build_fc_ginv: group degree must equal n");
  Model<Scalar> m(Arch::FcGinv, task, group);
  m.n = n;
  m.n_in = n_in;
  m.n_mid = n_mid;
  m.add_fc("fin.fc1", n_in, 16, rng);
  m.add_fc("fin.fc2", 16, 64, rng);
  m.add_fc("fin.fc3", 64, static_cast<Index>(n) * n_mid, rng);
  m.add_fc("fout.fc1", n_mid, 32, rng);
  m.add_fc("fout.fc2", 32, 1, rng);
  m.plan = {"input (n x n_in)",
            "fc " + std::to_string(n_in) + "->16 tanh (per row)",
            "fc 16->64 tanh (per row)",
            "fc 64->" + std::to_string(n * n_mid) + " linear (per row)",
            "reshape n x n x n_mid",
            "sigma-pi over " + group.label(),
            "fc " + std::to_string(n_mid) + "->32 tanh",
            "fc 32->1 linear"};
  return m;
}

/// Circular-pad + Conv1D trunk (3x1 kernels to 32 channels tanh, 1x1 to
/// n*n_mid linear), then the sum-product layer and FC(n_mid->32->32->1).
template <typename Scalar>
Model<Scalar> build_conv_ginv(const PermutationGroup& group, int n, int n_in, int n_mid, Rng& rng,
                              Task task = Task::Area) {
  if (group.degree() != n) throw std::invalid_argument("build_conv_ginv: group degree must equal n");
  Model<Scalar> m(Arch::ConvGinv, task, group);
  m.n = n;
  m.n_in = n_in;
  m.n_mid = n_mid;
  m.add_conv("fin.conv1", 3, n_in, 32, rng);
  m.add_conv("fin.conv2", 1, 32, static_cast<Index>(n) * n_mid, rng);
  m.add_fc("fout.fc1", n_mid, 32, rng);
  m.add_fc("fout.fc2", 32, 32, rng);
  m.add_fc("fout.fc3", 32, 1, rng);
  m.plan = {"input (n x n_in), circular pad k=3",
            "conv1d 3x" + std::to_string(n_in) + "->32 tanh",
            "conv1d 1x32->" + std::to_string(n * n_mid) + " linear",
            "reshape n x n x n_mid",
            "sigma-pi over " + group.label(),
            "fc " + std::to_string(n_mid) + "->32 tanh",
            "fc 32->32 tanh",
            "fc 32->1 linear"};
  return m;
}

/// Plain FC network wrapped in the Reynolds group average. Hidden widths
/// follow the published tables (poly: 89/192/32, area: 64/18); the input
/// width adapts to n * n_in.
template <typename Scalar>
Model<Scalar> build_fc_gavg(Task task, const PermutationGroup& group, int n, int n_in, Rng& rng) {
  if (group.degree() != n) throw std::invalid_argument("build_fc_gavg: group degree must equal n");
  Model<Scalar> m(Arch::FcGavg, task, group);
  m.n = n;
  m.n_in = n_in;
  m.n_mid = 0;
  const Index flat = static_cast<Index>(n) * n_in;
  if (task == Task::Poly) {
    m.add_fc("net.fc1", flat, 89, rng);
    m.add_fc("net.fc2", 89, 192, rng);
    m.add_fc("net.fc3", 192, 32, rng);
    m.add_fc("net.fc4", 32, 1, rng);
    m.plan = {"reynolds average over " + group.label(), "fc " + std::to_string(flat) + "->89 tanh",
              "fc 89->192 tanh", "fc 192->32 tanh", "fc 32->1 linear"};
  } else {
    m.add_fc("net.fc1", flat, 64, rng);
    m.add_fc("net.fc2", 64, 18, rng);
    m.add_fc("net.fc3", 18, 1, rng);
    m.plan = {"reynolds average over " + group.label(), "flatten",
              "fc " + std::to_string(flat) + "->64 tanh", "fc 64->18 tanh", "fc 18->1 linear"};
  }
  return m;
}

/// Conv1D network wrapped in the Reynolds group average (channels per the
/// published tables: 3x1 -> 32, 1x1 -> 118 poly / 2 area, FC 32 -> 1).
template <typename Scalar>
Model<Scalar> build_conv_gavg(Task task, const PermutationGroup& group, int n, int n_in, Rng& rng) {
  if (group.degree() != n) throw std::invalid_argument("build_conv_gavg: group degree must equal n");
  Model<Scalar> m(Arch::ConvGavg, task, group);
  m.n = n;
  m.n_in = n_in;
  m.n_mid = 0;
  const Index c2 = task == Task::Poly ? 118 : 2;
  m.add_conv("net.conv1", 3, n_in, 32, rng);
  m.add_conv("net.conv2", 1, 32, c2, rng);
  m.add_fc("net.fc1", static_cast<Index>(n) * c2, 32, rng);
  m.add_fc("net.fc2", 32, 1, rng);
  m.plan = {"reynolds average over " + group.label(),
            "circular pad k=3",
            "conv1d 3x" + std::to_string(n_in) + "->32 tanh",
            "conv1d 1x32->" + std::to_string(c2) + " tanh",
            "flatten",
            "fc " + std::to_string(n * c2) + "->32 tanh",
            "fc 32->1 linear"};
  return m;
}

/// Exact invariant polynomial features of degree <= |G| (orbit sums,
/// deduplicated) followed by the published MLP head.
template <typename Scalar>
Model<Scalar> build_maron(const PermutationGroup& group, int n, int n_in, Task task, Rng& rng,
                          std::uint64_t candidate_cap = 20000) {
  if (group.degree() != n) throw std::invalid_argument("build_maron: group degree must equal n");
  Model<Scalar> m(Arch::Maron, task, group);
  m.n = n;
  m.n_in = n_in;
  m.n_mid = 0;
  auto lifted = group.expanded(n_in);
  auto feats = generating_candidates(lifted, n * n_in, static_cast<int>(group.order()), candidate_cap);
  m.features = std::make_shared<const std::vector<InvariantPolynomial>>(std::move(feats));
  const Index F = static_cast<Index>(m.features->size());
  if (task == Task::Poly) {
    m.add_fc("mlp.fc1", F, 48, rng);
    m.add_fc("mlp.fc2", 48, 192, rng);
    m.add_fc("mlp.fc3", 192, 32, rng);
    m.add_fc("mlp.fc4", 32, 1, rng);
    m.plan = {std::to_string(F) + " invariant polynomial features (degree <= " +
                  std::to_string(group.order()) + ")",
              "fc " + std::to_string(F) + "->48 tanh", "fc 48->192 tanh", "fc 192->32 tanh",
              "fc 32->1 linear"};
  } else {
    m.add_fc("mlp.fc1", F, 40, rng);
    m.add_fc("mlp.fc2", 40, 1, rng);
    m.plan = {std::to_string(F) + " invariant polynomial features (degree <= " +
                  std::to_string(group.order()) + ")",
              "fc " + std::to_string(F) + "->40 tanh", "fc 40->1 linear"};
  }
  return m;
}

template <typename Scalar>
Model<Scalar> build_model(Arch arch, Task task, const PermutationGroup& group, int n, int n_in,
                          int n_mid, Rng& rng, std::uint64_t maron_cap = 20000) {
  switch (arch) {
    case Arch::FcGinv: return build_fc_ginv<Scalar>(group, n, n_in, n_mid, rng, task);
    case Arch::ConvGinv: return build_conv_ginv<Scalar>(group, n, n_in, n_mid, rng, task);
    case Arch::FcGavg: return build_fc_gavg<Scalar>(task, group, n, n_in, rng);
    case Arch::ConvGavg: return build_conv_gavg<Scalar>(task, group, n, n_in, rng);
    case Arch::Maron: return build_maron<Scalar>(group, n, n_in, task, rng, maron_cap);
  }
  throw std::logic_error("unreachable");
}

}  // namespace ginv
