#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ginv/dataset.hpp"
#include "ginv/graph.hpp"
#include "ginv/model.hpp"
#include "ginv/rng.hpp"

namespace ginv {

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

inline double mae(const std::vector<double>& pred, const std::vector<double>& target) {
  if (pred.size() != target.size() || pred.empty())
    throw std::invalid_argument("mae: length mismatch or empty input");
  double acc = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) acc += std::abs(pred[i] - target[i]);
  return acc / static_cast<double>(pred.size());
}

/// Mean absolute percentage error, in percent.
inline double mape(const std::vector<double>& pred, const std::vector<double>& target) {
  if (pred.size() != target.size() || pred.empty())
    throw std::invalid_argument("mape: length mismatch or empty input");
  double acc = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (target[i] == 0.0) throw std::invalid_argument("mape: zero target");
    acc += std::abs(pred[i] - target[i]) / std::abs(target[i]);
  }
  return 100.0 * acc / static_cast<double>(pred.size());
}

// ---------------------------------------------------------------------------
// loss
// ---------------------------------------------------------------------------

/// MAE between the (B, 1) prediction and a (B,) target constant.
template <typename Scalar>
Var<Scalar> mae_loss(Graph<Scalar>& g, Var<Scalar> pred, const Tensor<Scalar>& target) {
  auto flat = reshape(pred, {pred.value().size()});
  if (flat.value().size() != target.size()) throw std::invalid_argument("mae_loss: length mismatch");
  return mean_all(abs_val(sub(flat, g.constant(target))));
}

/// MAE + l2 * sum of squared weights (biases excluded).
template <typename Scalar>
Var<Scalar> training_loss(Graph<Scalar>& g, Model<Scalar>& model, const Tensor<Scalar>& x,
                          const Tensor<Scalar>& y, double l2) {
  Tensor<Scalar> xc = x;
  xc.requires_grad = false;
  auto loss = mae_loss(g, model.forward(g, g.leaf(xc)), y);
  if (l2 > 0.0) {
    Var<Scalar> reg;
    for (auto& p : model.params) {
      if (!p.is_weight) continue;
      auto term = sum_squares(g.leaf(p.tensor));
      reg = reg ? add(reg, term) : term;
    }
    if (reg) loss = add(loss, scale(reg, static_cast<Scalar>(l2)));
  }
  return loss;
}

// ---------------------------------------------------------------------------
// optimizer
// ---------------------------------------------------------------------------

/// Adam with the standard moment defaults (0.9, 0.999, eps 1e-8).
template <typename Scalar>
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {}

  void step(std::vector<Param<Scalar>>& params) {
    using Array = typename Tensor<Scalar>::Array;
    if (m_.empty()) {
      for (const auto& p : params) {
        m_.push_back(Array::Zero(p.tensor.size()));
        v_.push_back(Array::Zero(p.tensor.size()));
      }
    }
    ++t_;
    const Scalar c1 = static_cast<Scalar>(1.0 - std::pow(b1_, t_));
    const Scalar c2 = static_cast<Scalar>(1.0 - std::pow(b2_, t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = params[i].tensor;
      if (p.grad.size() == 0) continue;
      m_[i] = static_cast<Scalar>(b1_) * m_[i] + static_cast<Scalar>(1.0 - b1_) * p.grad;
      v_[i] = static_cast<Scalar>(b2_) * v_[i] + static_cast<Scalar>(1.0 - b2_) * p.grad.square();
      p.data() -= static_cast<Scalar>(lr_) * (m_[i] / c1) /
                  ((v_[i] / c2).sqrt() + static_cast<Scalar>(eps_));
    }
  }

 private:
  double lr_, b1_, b2_, eps_;
  int t_ = 0;
  std::vector<typename Tensor<Scalar>::Array> m_, v_;
};

// ---------------------------------------------------------------------------
// training loop
// ---------------------------------------------------------------------------

struct TrainConfig {
  int epochs = 2500;
  Index batch_size = 16;
  double lr = 1e-3;
  double l2 = 1e-5;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};

  void validate() const {
    if (epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("train: batch_size must be >= 1");
    if (lr <= 0 || l2 < 0) throw std::invalid_argument("train: rates must be positive");
    if (seeds.empty()) throw std::invalid_argument("train: at least one seed required");
  }
};

struct EpochPoint {
  double train_mae, val_mae, train_mape, val_mape;
};

struct SplitMetrics {
  double mae = 0, mape = 0;
};

struct RunMetrics {
  std::vector<EpochPoint> curve;  // index 0 = before training, then one per epoch
  SplitMetrics train_final, val_final, test_final;
  int best_epoch = 0;
  double latency_mean_ms = 0, latency_std_ms = 0;
  std::uint64_t sigma_pi_mults_per_item = 0;
  std::uint64_t fin_activation_scalars_per_item = 0;
};

namespace detail {

template <typename Scalar>
std::vector<double> predict_all(Model<Scalar>& model, const Tensor<Scalar>& inputs,
                                Index chunk = 2048) {
  const Index count = inputs.dim(0);
  const Index item = inputs.size() / std::max<Index>(count, 1);
  std::vector<double> out(static_cast<std::size_t>(count));
  for (Index start = 0; start < count; start += chunk) {
    const Index len = std::min(chunk, count - start);
    Tensor<Scalar> block({len, inputs.dim(1), inputs.dim(2)});
    block.data() = inputs.data().segment(start * item, len * item);
    auto pred = model.predict(block);
    for (Index i = 0; i < len; ++i) out[static_cast<std::size_t>(start + i)] = pred[i];
  }
  return out;
}

inline std::vector<double> to_double_vec(const Tensor<double>& t) {
  return std::vector<double>(t.data().data(), t.data().data() + t.size());
}

template <typename Scalar>
SplitMetrics eval_split(Model<Scalar>& model, const Split& split) {
  auto pred = predict_all(model, split.inputs.template cast<Scalar>());
  auto target = to_double_vec(split.targets);
  return {mae(pred, target), mape(pred, target)};
}

}  // namespace detail

/// Minimizes MAE + l2*||W||^2 with Adam over shuffled mini-batches;
/// evaluates validation after every epoch and returns the model restored to
/// the parameter snapshot with minimal validation MAE. Deterministic per
/// (model init, seed).
template <typename Scalar>
RunMetrics train_model(Model<Scalar>& model, const Dataset& data, const TrainConfig& cfg,
                       std::uint64_t seed) {
  cfg.validate();
  RunMetrics metrics;
  Rng shuffle_rng(seed * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull);

  const Tensor<Scalar> train_x = data.train.inputs.cast<Scalar>();
  const Tensor<Scalar> train_y = data.train.targets.cast<Scalar>();
  const Index count = data.train.count();
  const Index item = train_x.size() / std::max<Index>(count, 1);

  model.set_requires_grad(true);
  Adam<Scalar> opt(cfg.lr);

  auto record_epoch = [&]() {
    auto tm = detail::eval_split(model, data.train);
    auto vm = detail::eval_split(model, data.val);
    metrics.curve.push_back({tm.mae, vm.mae, tm.mape, vm.mape});
    return vm.mae;
  };

  double best_val = record_epoch();  // epoch 0: before any update
  auto best_params = model.snapshot();
  metrics.best_epoch = 0;

  std::vector<Index> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), Index(0));

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    // Fisher-Yates with the run RNG
    for (Index i = count - 1; i > 0; --i)
      std::swap(order[static_cast<std::size_t>(i)],
                order[shuffle_rng.below(static_cast<std::uint64_t>(i + 1))]);

    for (Index start = 0; start < count; start += cfg.batch_size) {
      const Index len = std::min(cfg.batch_size, count - start);
      Tensor<Scalar> bx({len, train_x.dim(1), train_x.dim(2)});
      Tensor<Scalar> by({len});
      for (Index i = 0; i < len; ++i) {
        const Index src = order[static_cast<std::size_t>(start + i)];
        bx.data().segment(i * item, item) = train_x.data().segment(src * item, item);
        by[i] = train_y[src];
      }
      model.zero_grad();
      Graph<Scalar> g;
      auto loss = training_loss(g, model, bx, by, cfg.l2);
      if (!std::isfinite(static_cast<double>(scalar_value(loss))))
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 " (lr=" + std::to_string(cfg.lr) + ")");
      g.backward(loss);
      opt.step(model.params);
    }

    double val_mae = record_epoch();
    if (val_mae < best_val) {
      best_val = val_mae;
      best_params = model.snapshot();
      metrics.best_epoch = epoch;
    }
  }

  model.restore(best_params);
  metrics.train_final = detail::eval_split(model, data.train);
  metrics.val_final = detail::eval_split(model, data.val);
  metrics.test_final = detail::eval_split(model, data.test);
  return metrics;
}

// ---------------------------------------------------------------------------
// latency + instrumentation snapshots
// ---------------------------------------------------------------------------

/// Mean and std of the forward wall-clock over `passes` timed passes at the
/// given batch, in milliseconds (single-threaded, non-recording).
template <typename Scalar>
std::pair<double, double> measure_latency(Model<Scalar>& model, const Tensor<Scalar>& batch,
                                          int passes = 300, int warmup = 20) {
  using clock = std::chrono::steady_clock;
  double sink = 0;
  for (int i = 0; i < warmup; ++i) sink += static_cast<double>(model.predict(batch)[0]);
  std::vector<double> ms(static_cast<std::size_t>(passes));
  for (int i = 0; i < passes; ++i) {
    auto t0 = clock::now();
    auto out = model.predict(batch);
    auto t1 = clock::now();
    sink += static_cast<double>(out[0]);
    ms[static_cast<std::size_t>(i)] = std::chrono::duration<double, std::milli>(t1 - t0).count();
  }
  if (!std::isfinite(sink)) throw std::runtime_error("measure_latency: non-finite forward output");
  double mean = 0;
  for (double v : ms) mean += v;
  mean /= static_cast<double>(passes);
  double var = 0;
  for (double v : ms) var += (v - mean) * (v - mean);
  var /= static_cast<double>(passes);
  return {mean, std::sqrt(var)};
}

/// Runs one unbatched forward and snapshots the sum-product multiplication
/// tally and the f_in activation footprint (scalars per item).
template <typename Scalar>
void snapshot_instrumentation(Model<Scalar>& model, RunMetrics& metrics) {
  Tensor<Scalar> one({1, static_cast<Index>(model.n), static_cast<Index>(model.n_in)});
  Rng rng(1234);
  for (Index i = 0; i < one.size(); ++i) one[i] = static_cast<Scalar>(rng.uniform());
  model.sigma_pi_mults = 0;
  model.fin_activation_scalars_per_item = 0;
  model.predict(one);
  metrics.sigma_pi_mults_per_item = model.sigma_pi_mults;
  metrics.fin_activation_scalars_per_item = model.fin_activation_scalars_per_item;
}

// ---------------------------------------------------------------------------
// multi-seed experiments
// ---------------------------------------------------------------------------

struct Aggregate {
  double mean = 0, stdev = 0;  // population std over seeds
};

inline Aggregate aggregate(const std::vector<double>& xs) {
  Aggregate a;
  if (xs.empty()) return a;
  for (double x : xs) a.mean += x;
  a.mean /= static_cast<double>(xs.size());
  for (double x : xs) a.stdev += (x - a.mean) * (x - a.mean);
  a.stdev = std::sqrt(a.stdev / static_cast<double>(xs.size()));
  return a;
}

struct ExperimentResult {
  Aggregate train_mae, val_mae, test_mae;
  Aggregate train_mape, val_mape, test_mape;
  double latency_mean_ms = 0, latency_std_ms = 0;
  std::uint64_t sigma_pi_mults_per_item = 0;
  std::uint64_t fin_activation_scalars_per_item = 0;
  Index param_count = 0;
  std::vector<RunMetrics> per_seed;
};

inline int worker_count(std::size_t jobs) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("GINV_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1) hw = std::min(hw, cap);
  }
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(hw), jobs));
}

/// Runs fn(i) for i in [0, jobs) on up to worker_count(jobs) threads.
template <typename Fn>
void parallel_for(std::size_t jobs, Fn&& fn) {
  const int workers = worker_count(jobs);
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next.fetch_add(1); i < jobs; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Builds one model per seed (init seed = run seed), trains each on the
/// shared dataset, and aggregates the best-checkpoint metrics. Latency is
/// measured on the first seed's best model at batch size 16. When given,
/// out_models receives the per-seed best models and on_seed_done fires
/// after each seed finishes (from worker threads).
template <typename Scalar>
ExperimentResult run_experiment(
    Arch arch, Task task, const PermutationGroup& group, int n, int n_in, int n_mid,
    const Dataset& data, const TrainConfig& cfg, std::uint64_t maron_cap = 20000,
    bool measure_timing = true, std::vector<Model<Scalar>>* out_models = nullptr,
    const std::function<void(std::size_t, const RunMetrics&)>& on_seed_done = {}) {
  cfg.validate();
  ExperimentResult result;
  result.per_seed.resize(cfg.seeds.size());
  std::vector<Model<Scalar>> best_models;
  best_models.reserve(cfg.seeds.size());
  for (std::size_t s = 0; s < cfg.seeds.size(); ++s) {
    Rng init_rng(cfg.seeds[s]);
    best_models.push_back(build_model<Scalar>(arch, task, group, n, n_in, n_mid, init_rng, maron_cap));
  }

  parallel_for(cfg.seeds.size(), [&](std::size_t s) {
    result.per_seed[s] = train_model(best_models[s], data, cfg, cfg.seeds[s]);
    if (on_seed_done) on_seed_done(s, result.per_seed[s]);
  });

  auto collect = [&](auto pick) {
    std::vector<double> xs;
    xs.reserve(result.per_seed.size());
    for (const auto& m : result.per_seed) xs.push_back(pick(m));
    return aggregate(xs);
  };
  result.train_mae = collect([](const RunMetrics& m) { return m.train_final.mae; });
  result.val_mae = collect([](const RunMetrics& m) { return m.val_final.mae; });
  result.test_mae = collect([](const RunMetrics& m) { return m.test_final.mae; });
  result.train_mape = collect([](const RunMetrics& m) { return m.train_final.mape; });
  result.val_mape = collect([](const RunMetrics& m) { return m.val_final.mape; });
  result.test_mape = collect([](const RunMetrics& m) { return m.test_final.mape; });
  result.param_count = best_models.front().param_count();

  snapshot_instrumentation(best_models.front(), result.per_seed.front());
  result.sigma_pi_mults_per_item = result.per_seed.front().sigma_pi_mults_per_item;
  result.fin_activation_scalars_per_item = result.per_seed.front().fin_activation_scalars_per_item;

  if (measure_timing) {
    const Index bs = std::min<Index>(16, data.test.count());
    Tensor<Scalar> batch({bs, static_cast<Index>(n), static_cast<Index>(n_in)});
    batch.data() = data.test.inputs.cast<Scalar>().data().segment(0, batch.size());
    auto [mean_ms, std_ms] = measure_latency(best_models.front(), batch);
    result.latency_mean_ms = mean_ms;
    result.latency_std_ms = std_ms;
  }
  if (out_models) *out_models = std::move(best_models);
  return result;
}

}  // namespace ginv
