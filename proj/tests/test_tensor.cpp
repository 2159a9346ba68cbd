#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <ginv/gradcheck.hpp>
#include <ginv/graph.hpp>
#include <ginv/layers.hpp>
#include <ginv/rng.hpp>
#include <ginv/tensor.hpp>

using namespace ginv;

namespace {

template <typename S>
Tensor<S> randn(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  return Tensor<S>::uniform(std::move(shape), rng, lo, hi);
}

}  // namespace

TEST_CASE("tensor shape bookkeeping") {
  Tensor<float> t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  CHECK(t.data().abs().sum() == 0.0f);
  CHECK_THROWS_AS(Tensor<float>({2, 2}).reshaped({3, 2}), std::invalid_argument);
  auto r = Tensor<float>::of({4, 4}, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15});
  // reshape roundtrips are bit-exact
  auto back = r.reshaped({2, 8}).reshaped({4, 4});
  CHECK((back.data() == r.data()).all());
}

TEST_CASE("affine forward values") {
  Graph<double> g;
  auto x = g.constant(Tensor<double>::of({2}, {1, 2}));
  auto W = g.constant(Tensor<double>::of({2, 2}, {1, 0, 0, 1}));
  auto b = g.constant(Tensor<double>::of({2}, {0, 0}));
  auto y = affine(x, W, b);
  CHECK(y.value()[0] == 1.0);
  CHECK(y.value()[1] == 2.0);

  auto x2 = g.constant(Tensor<double>::of({2}, {1, 1}));
  auto W2 = g.constant(Tensor<double>::of({2, 1}, {2, 3}));
  auto b2 = g.constant(Tensor<double>::of({1}, {1}));
  CHECK(scalar_value(affine(x2, W2, b2)) == 6.0);  // 1*2 + 1*3 + 1

  auto bad = g.constant(Tensor<double>::of({3}, {1, 1, 1}));
  CHECK_THROWS_AS(affine(bad, W2, b2), std::invalid_argument);
}

TEST_CASE("affine bias gradient is all-ones under sum") {
  Tensor<double> b0 = Tensor<double>::of({3}, {0.1, 0.2, 0.3});
  Rng rng(3);
  auto x0 = randn<double>({4, 2}, rng);
  auto W0 = randn<double>({2, 3}, rng);
  b0.requires_grad = true;
  Graph<double> g;
  auto loss = sum_all(affine(g.constant(x0), g.constant(W0), g.leaf(b0)));
  g.backward(loss);
  REQUIRE(b0.grad.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(b0.grad[i] == doctest::Approx(4.0));  // 4 rows
}

TEST_CASE("tanh values and saturation") {
  Graph<double> g;
  auto y = tanh_act(g.constant(Tensor<double>::of({3}, {0.0, 20.0, -20.0})));
  CHECK(y.value()[0] == 0.0);
  CHECK(y.value()[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(y.value()[2] == doctest::Approx(-1.0).epsilon(1e-6));

  // gradient at a saturated input is ~0
  Tensor<double> x = Tensor<double>::of({1}, {20.0});
  x.requires_grad = true;
  Graph<double> g2;
  auto loss = sum_all(tanh_act(g2.leaf(x)));
  g2.backward(loss);
  CHECK(std::abs(x.grad[0]) < 1e-6);
}

TEST_CASE("tanh gradcheck") {
  Rng rng(17);
  auto x = randn<double>({3, 4}, rng);
  double err = grad_check<double>(
      [](Graph<double>&, Var<double> v) { return sum_all(tanh_act(v)); }, x, 1e-6);
  CHECK(err <= 1e-4);
}

TEST_CASE("conv1d forward values") {
  Graph<double> g;
  // k=1 identity channel map leaves x unchanged
  auto x = g.constant(Tensor<double>::of({3, 2}, {1, 2, 3, 4, 5, 6}));
  auto k_id = g.constant(Tensor<double>::of({1, 2, 2}, {1, 0, 0, 1}));
  auto b0 = g.constant(Tensor<double>::zeros({2}));
  auto y = conv1d_valid(x, k_id, b0);
  CHECK((y.value().data() == x.value().data()).all());

  // window sum
  auto x2 = g.constant(Tensor<double>::of({3, 1}, {1, 2, 3}));
  auto k3 = g.constant(Tensor<double>::of({3, 1, 1}, {1, 1, 1}));
  auto b1 = g.constant(Tensor<double>::zeros({1}));
  auto y2 = conv1d_valid(x2, k3, b1);
  CHECK(y2.value().size() == 1);
  CHECK(y2.value()[0] == 6.0);

  // L < k rejected
  auto xs = g.constant(Tensor<double>::of({2, 1}, {1, 2}));
  CHECK_THROWS_AS(conv1d_valid(xs, k3, b1), std::invalid_argument);
}

TEST_CASE("conv1d gradcheck, batched and unbatched") {
  Rng rng(23);
  auto k0 = randn<double>({3, 2, 3}, rng);
  auto b0 = randn<double>({3}, rng);
  auto x0 = randn<double>({6, 2}, rng);
  double ex = grad_check<double>(
      [&](Graph<double>& g, Var<double> v) {
        return sum_all(conv1d_valid(v, g.constant(k0), g.constant(b0)));
      },
      x0, 1e-6);
  CHECK(ex <= 1e-4);
  double ek = grad_check<double>(
      [&](Graph<double>& g, Var<double> v) {
        return sum_all(conv1d_valid(g.constant(x0), v, g.constant(b0)));
      },
      k0, 1e-6);
  CHECK(ek <= 1e-4);

  auto xb = randn<double>({2, 6, 2}, rng);
  double eb = grad_check<double>(
      [&](Graph<double>& g, Var<double> v) {
        return mean_all(tanh_act(conv1d_valid(v, g.constant(k0), g.constant(b0))));
      },
      xb, 1e-6);
  CHECK(eb <= 1e-4);
}

TEST_CASE("reduce_prod values and leave-one-out gradient") {
  Tensor<double> x = Tensor<double>::of({3}, {2, 3, 4});
  x.requires_grad = true;
  Graph<double> g;
  auto y = reduce_prod(g.leaf(x), 0);
  CHECK(y.value()[0] == 24.0);
  g.backward(y);
  CHECK(x.grad[0] == 12.0);
  CHECK(x.grad[1] == 8.0);
  CHECK(x.grad[2] == 6.0);

  // zero factor: gradient via leave-one-out products, not division
  Tensor<double> z = Tensor<double>::of({3}, {0, 5, 7});
  z.requires_grad = true;
  Graph<double> g2;
  auto y2 = reduce_prod(g2.leaf(z), 0);
  CHECK(y2.value()[0] == 0.0);
  g2.backward(y2);
  CHECK(z.grad[0] == 35.0);
  CHECK(z.grad[1] == 0.0);
  CHECK(z.grad[2] == 0.0);
}

TEST_CASE("reduce_prod gradcheck including a zero entry") {
  Rng rng(5);
  auto x = randn<double>({4, 3}, rng);
  x[5] = 0.0;
  for (int axis : {0, 1}) {
    double err = grad_check<double>(
        [axis](Graph<double>&, Var<double> v) { return sum_all(reduce_prod(v, axis)); }, x, 1e-6);
    CHECK(err <= 1e-4);
  }
}

TEST_CASE("reduce_sum values and gradient") {
  Tensor<double> x = Tensor<double>::zeros({4});
  x.requires_grad = true;
  Graph<double> g;
  auto y = reduce_sum(g.leaf(x), 0);
  CHECK(y.value()[0] == 0.0);
  g.backward(y);
  for (int i = 0; i < 4; ++i) CHECK(x.grad[i] == 1.0);

  Graph<double> g2;
  auto m = g2.constant(Tensor<double>::of({2, 3}, {1, 2, 3, 4, 5, 6}));
  auto s0 = reduce_sum(m, 0);
  CHECK(s0.value()[0] == 5.0);
  CHECK(s0.value()[2] == 9.0);
  auto s1 = reduce_sum(m, 1);
  CHECK(s1.value()[0] == 6.0);
  CHECK(s1.value()[1] == 15.0);
  CHECK_THROWS_AS(reduce_sum(m, 2), std::invalid_argument);
}

TEST_CASE("gather semantics") {
  Graph<double> g;
  auto x = g.constant(Tensor<double>::of({3, 2}, {0, 0, 1, 1, 2, 2}));
  auto y = gather_rows(x, {0, 1, 2});
  CHECK((y.value().data() == x.value().data()).all());
  CHECK_THROWS_AS(gather_rows(x, {3}), std::invalid_argument);

  // backward of gather with repeated index accumulates into row 0
  Tensor<double> t = Tensor<double>::of({2, 2}, {1, 2, 3, 4});
  t.requires_grad = true;
  Graph<double> g2;
  auto picked = gather_rows(g2.leaf(t), {0, 0});
  g2.backward(sum_all(picked));
  CHECK(t.grad[0] == 2.0);
  CHECK(t.grad[1] == 2.0);
  CHECK(t.grad[2] == 0.0);

  // middle-axis gather
  Graph<double> g3;
  auto m = g3.constant(Tensor<double>::of({2, 2, 2}, {0, 1, 2, 3, 4, 5, 6, 7}));
  auto picked3 = gather(m, 1, {1, 0, 1});
  CHECK(picked3.shape() == Shape{2, 3, 2});
  CHECK(picked3.value().at({0, 0, 0}) == 2);
  CHECK(picked3.value().at({1, 2, 1}) == 7);
}

TEST_CASE("grad_check on a linear function is near machine precision") {
  Rng rng(9);
  auto x = randn<double>({5}, rng);
  double err =
      grad_check<double>([](Graph<double>&, Var<double> v) { return sum_all(v); }, x, 1e-6);
  CHECK(err <= 1e-10);
}

TEST_CASE("backward accumulates when one leaf feeds two consumers") {
  Tensor<double> x = Tensor<double>::of({2}, {1.0, 2.0});
  x.requires_grad = true;
  Graph<double> g;
  auto v = g.leaf(x);
  auto a = scale(v, 3.0);
  auto b = tanh_act(v);
  g.backward(add(sum_all(a), sum_all(b)));
  for (int i = 0; i < 2; ++i) {
    double expected = 3.0 + (1.0 - std::tanh(x[i]) * std::tanh(x[i]));
    CHECK(x.grad[i] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("sum_squares and mean_all") {
  Tensor<double> x = Tensor<double>::of({3}, {1, -2, 3});
  x.requires_grad = true;
  Graph<double> g;
  auto v = g.leaf(x);
  CHECK(scalar_value(sum_squares(v)) == 14.0);
  CHECK(scalar_value(mean_all(v)) == doctest::Approx(2.0 / 3.0));
  Rng rng(31);
  auto y = randn<double>({4}, rng);
  double err = grad_check<double>(
      [](Graph<double>&, Var<double> v2) { return sum_squares(v2); }, y, 1e-6);
  CHECK(err <= 1e-6);
}

TEST_CASE("abs gradient uses sign") {
  Tensor<double> x = Tensor<double>::of({3}, {-2.0, 0.0, 5.0});
  x.requires_grad = true;
  Graph<double> g;
  g.backward(sum_all(abs_val(g.leaf(x))));
  CHECK(x.grad[0] == -1.0);
  CHECK(x.grad[1] == 0.0);
  CHECK(x.grad[2] == 1.0);
}

TEST_CASE("every differentiable op passes gradcheck on random inputs") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    auto x = randn<double>({2, 3, 2}, rng);
    auto W = randn<double>({2, 4}, rng);
    auto b = randn<double>({4}, rng);
    double err = grad_check<double>(
        [&](Graph<double>& g, Var<double> v) {
          auto h = affine(v, g.constant(W), g.constant(b));
          h = tanh_act(h);
          auto p = reduce_prod(h, 1);
          auto s = reduce_sum(p, 0);
          return mean_all(abs_val(s));
        },
        x, 1e-6);
    CHECK(err <= 1e-4);
  }
}

TEST_CASE("recording off skips backward bookkeeping") {
  Tensor<float> x = Tensor<float>::of({2}, {1, 2});
  x.requires_grad = true;
  Graph<float> g;
  g.recording = false;
  auto y = tanh_act(g.leaf(x));
  CHECK(y.value().size() == 2);
  CHECK_THROWS_AS(g.backward(sum_all(y)), std::invalid_argument);
}
