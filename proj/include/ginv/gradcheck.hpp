#pragma once

#include <algorithm>
#include <cmath>

#include "ginv/graph.hpp"

namespace ginv {

/// Compares the reverse-mode gradient of a scalar-valued function against
/// central finite differences, coordinate by coordinate. Returns the worst
/// relative error with denominator max(|analytic|, |numeric|, 1e-8).
/// f: (Graph<Scalar>&, Var<Scalar>) -> Var<Scalar> (scalar output).
template <typename Scalar, typename F>
double grad_check(F&& f, const Tensor<Scalar>& x0, Scalar eps) {
  Tensor<Scalar> x = x0;
  x.requires_grad = true;
  x.zero_grad();
  Graph<Scalar> g;
  auto loss = f(g, g.leaf(x));
  g.backward(loss);
  typename Tensor<Scalar>::Array analytic =
      x.grad.size() > 0 ? x.grad : Tensor<Scalar>::Array::Zero(x.size()).eval();

  auto eval = [&](Tensor<Scalar>& xp) {
    xp.requires_grad = false;
    Graph<Scalar> ge;
    ge.recording = false;
    return static_cast<double>(scalar_value(f(ge, ge.leaf(xp))));
  };

  double worst = 0;
  Tensor<Scalar> xp = x0;
  for (Index i = 0; i < x0.size(); ++i) {
    const Scalar keep = xp[i];
    xp[i] = keep + eps;
    const double fp = eval(xp);
    xp[i] = keep - eps;
    const double fm = eval(xp);
    xp[i] = keep;
    const double numeric = (fp - fm) / (2.0 * static_cast<double>(eps));
    const double a = static_cast<double>(analytic[i]);
    const double denom = std::max({std::abs(numeric), std::abs(a), 1e-8});
    worst = std::max(worst, std::abs(numeric - a) / denom);
  }
  return worst;
}

}  // namespace ginv
