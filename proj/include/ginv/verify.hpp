#pragma once

#include <algorithm>
#include <cmath>

#include "ginv/gradcheck.hpp"
#include "ginv/model.hpp"
#include "ginv/train.hpp"

namespace ginv {

/// Worst invariance residual of a model over `n_inputs` random inputs and
/// every group element: max |f(g(x)) - f(x)| / (1 + |f(x)|).
template <typename Scalar>
double invariance_max_residual(Model<Scalar>& model, int n_inputs, Rng& rng) {
  double worst = 0;
  for (int t = 0; t < n_inputs; ++t) {
    Tensor<Scalar> x({1, static_cast<Index>(model.n), static_cast<Index>(model.n_in)});
    for (Index i = 0; i < x.size(); ++i) x[i] = static_cast<Scalar>(rng.uniform(-1.0, 1.0));
    const double base = static_cast<double>(model.predict(x)[0]);
    const double denom = 1.0 + std::abs(base);
    for (const auto& e : model.group.elements()) {
      Tensor<Scalar> moved = act_on_rows(e, x);
      const double out = static_cast<double>(model.predict(moved)[0]);
      worst = std::max(worst, std::abs(out - base) / denom);
    }
  }
  return worst;
}

/// Finite-difference check of d(loss)/d(theta) for every parameter
/// coordinate, against one reverse-mode sweep. Returns the worst relative
/// error (denominator max(|a|, |b|, 1e-8)).
template <typename Scalar>
double model_param_grad_check(Model<Scalar>& model, const Tensor<Scalar>& x, const Tensor<Scalar>& y,
                              double l2, Scalar eps) {
  model.set_requires_grad(true);
  model.zero_grad();
  {
    Graph<Scalar> g;
    g.backward(training_loss(g, model, x, y, l2));
  }
  std::vector<typename Tensor<Scalar>::Array> analytic;
  analytic.reserve(model.params.size());
  for (auto& p : model.params) {
    p.tensor.ensure_grad();
    analytic.push_back(p.tensor.grad);
  }

  auto eval = [&]() {
    model.set_requires_grad(false);
    Graph<Scalar> g;
    g.recording = false;
    double v = static_cast<double>(scalar_value(training_loss(g, model, x, y, l2)));
    model.set_requires_grad(true);
    return v;
  };

  double worst = 0;
  for (std::size_t pi = 0; pi < model.params.size(); ++pi) {
    auto& t = model.params[pi].tensor;
    for (Index i = 0; i < t.size(); ++i) {
      const Scalar keep = t[i];
      t[i] = keep + eps;
      const double fp = eval();
      t[i] = keep - eps;
      const double fm = eval();
      t[i] = keep;
      const double numeric = (fp - fm) / (2.0 * static_cast<double>(eps));
      const double a = static_cast<double>(analytic[pi][i]);
      const double denom = std::max({std::abs(numeric), std::abs(a), 1e-8});
      worst = std::max(worst, std::abs(numeric - a) / denom);
    }
  }
  return worst;
}

/// Input-side gradcheck of MAE(forward(x), y) w.r.t. x.
template <typename Scalar>
double model_input_grad_check(Model<Scalar>& model, const Tensor<Scalar>& x, const Tensor<Scalar>& y,
                              Scalar eps) {
  model.set_requires_grad(false);
  return grad_check<Scalar>(
      [&](Graph<Scalar>& g, Var<Scalar> v) { return mae_loss(g, model.forward(g, v), y); }, x, eps);
}

}  // namespace ginv
