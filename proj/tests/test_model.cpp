#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <ginv/model.hpp>
#include <ginv/verify.hpp>

#include <filesystem>

using namespace ginv;

namespace {

template <typename S>
Tensor<S> random_batch(int count, int n, int n_in, Rng& rng, double lo = -1.0, double hi = 1.0) {
  return Tensor<S>::uniform({count, n, n_in}, rng, lo, hi);
}

std::vector<PermutationGroup> invariance_groups() {
  using PG = PermutationGroup;
  return {PG::cyclic(4),      PG::cyclic(5), PG::dihedral(4), PG::alternating(4), PG::symmetric(4),
          PG::direct_product(PG::symmetric(3), PG::symmetric(2))};
}

}  // namespace

TEST_CASE("published parameter counts are reproduced exactly") {
  Rng rng(1);
  auto z4 = PermutationGroup::cyclic(4);
  auto z5 = PermutationGroup::cyclic(5);

  auto fc_area = build_fc_ginv<float>(z4, 4, 2, 2, rng, Task::Area);
  CHECK(fc_area.param_count() == 1785);

  auto conv_area = build_conv_ginv<float>(z4, 4, 2, 2, rng, Task::Area);
  CHECK(conv_area.param_count() == 1673);

  auto fc_gavg_area = build_fc_gavg<float>(Task::Area, z4, 4, 2, rng);
  CHECK(fc_gavg_area.param_count() == 1765);

  auto fc_poly = build_fc_ginv<float>(z5, 5, 1, 64, rng, Task::Poly);
  CHECK(fc_poly.param_count() == 24033);  // within 1% of 24.0k

  auto fc_gavg_poly = build_fc_gavg<float>(Task::Poly, z5, 5, 1, rng);
  CHECK(fc_gavg_poly.param_count() == 24023);  // within 1% of 24.0k

  auto conv_poly = build_conv_ginv<float>(z5, 5, 1, 118, rng, Task::Poly);
  CHECK(conv_poly.param_count() == 24495);  // within 5% of 24.0k

  auto conv_gavg_poly = build_conv_gavg<float>(Task::Poly, z5, 5, 1, rng);
  CHECK(conv_gavg_poly.param_count() == 22967);

  auto conv_gavg_area = build_conv_gavg<float>(Task::Area, z4, 4, 2, rng);
  CHECK(conv_gavg_area.param_count() == 611);
}

TEST_CASE("maron feature counts match the orbit census") {
  Rng rng(2);
  // degree <= 5 monomials on 5 vars under Z5: 251 candidates, 51 orbits
  auto maron_poly = build_maron<float>(PermutationGroup::cyclic(5), 5, 1, Task::Poly, rng);
  CHECK(maron_poly.features->size() == 51);
  CHECK(maron_poly.param_count() == 51 * 48 + 48 + 48 * 192 + 192 + 192 * 32 + 32 + 32 + 1);

  // degree <= 4 monomials on 8 vars under the lifted Z4: 494 candidates, 128 orbits
  auto maron_area = build_maron<float>(PermutationGroup::cyclic(4), 4, 2, Task::Area, rng);
  CHECK(maron_area.features->size() == 128);
  CHECK(maron_area.param_count() == 128 * 40 + 40 + 40 + 1);

  // default candidate cap rejects |G| = 24 on 4 points (20474 monomials)
  CHECK_THROWS_AS(build_maron<float>(PermutationGroup::symmetric(4), 4, 1, Task::Poly, rng),
                  std::runtime_error);
  // an explicit higher cap admits it
  auto maron_s4 = build_maron<float>(PermutationGroup::symmetric(4), 4, 1, Task::Poly, rng, 30000);
  CHECK(maron_s4.features->size() > 0);
}

TEST_CASE("forward output shape and batch consistency") {
  Rng rng(3);
  auto z4 = PermutationGroup::cyclic(4);
  for (Arch arch : {Arch::FcGinv, Arch::ConvGinv, Arch::FcGavg, Arch::ConvGavg, Arch::Maron}) {
    Rng init(7);
    auto model = build_model<float>(arch, Task::Area, z4, 4, 2, 2, init);
    auto x = random_batch<float>(5, 4, 2, rng);
    auto y = model.predict(x);
    CHECK(y.shape() == Shape{5, 1});
    // single-item forward agrees with the batched row
    Tensor<float> one({1, 4, 2});
    one.data() = x.data().segment(0, 8);
    CHECK(model.predict(one)[0] == doctest::Approx(y[0]).epsilon(1e-6));

    auto bad = random_batch<float>(2, 5, 2, rng);
    CHECK_THROWS_AS(model.predict(bad), std::invalid_argument);
  }
}

TEST_CASE("G-invariance at random initialization for every architecture") {
  for (const auto& G : invariance_groups()) {
    const int n = G.degree();
    for (Arch arch : {Arch::FcGinv, Arch::FcGavg, Arch::ConvGavg, Arch::Maron}) {
      // Maron features stay desk-scale with a single input column
      const int n_in = arch == Arch::Maron ? 1 : 2;
      Rng init(11 + static_cast<std::uint64_t>(arch));
      auto model =
          build_model<float>(arch, Task::Area, G, n, n_in, 3, init, /*maron_cap=*/30000);
      Rng rng(17);
      CHECK_MESSAGE(invariance_max_residual(model, 20, rng) <= 1e-5,
                    to_string(arch), " on ", G.label());
    }
  }
  // the conv G-inv trunk commutes with the cyclic shift only
  for (const auto& G : {PermutationGroup::cyclic(4), PermutationGroup::cyclic(5)}) {
    Rng init(23);
    auto model = build_conv_ginv<float>(G, G.degree(), 2, 3, init);
    Rng rng(29);
    CHECK_MESSAGE(invariance_max_residual(model, 20, rng) <= 1e-5, "conv-ginv on ", G.label());
  }
}

TEST_CASE("conv-ginv is equivariant under the shift, not under reflections") {
  auto d8 = PermutationGroup::dihedral(4);
  Rng init(31);
  auto model = build_conv_ginv<float>(d8, 4, 2, 2, init);
  Rng rng(37);
  // the D8 group contains reflections the cyclic convolution cannot absorb
  CHECK(invariance_max_residual(model, 20, rng) > 1e-4);
}

TEST_CASE("end-to-end parameter gradcheck for every architecture") {
  auto z4 = PermutationGroup::cyclic(4);
  Rng rng(41);
  auto x = random_batch<double>(6, 4, 2, rng, 0.1, 1.0);
  auto y = Tensor<double>::uniform({6}, rng, 0.2, 1.0);
  for (Arch arch : {Arch::FcGinv, Arch::ConvGinv, Arch::FcGavg, Arch::ConvGavg, Arch::Maron}) {
    Rng init(43 + static_cast<std::uint64_t>(arch));
    auto model = build_model<double>(arch, Task::Area, z4, 4, 2, 3, init);
    double err = model_param_grad_check(model, x, y, 1e-5, 1e-4);
    CHECK_MESSAGE(err <= 1e-4, to_string(arch), " worst rel err ", err);
  }
}

TEST_CASE("end-to-end input gradcheck for every architecture") {
  auto z4 = PermutationGroup::cyclic(4);
  Rng rng(47);
  auto x = random_batch<double>(4, 4, 2, rng, 0.1, 1.0);
  auto y = Tensor<double>::uniform({4}, rng, 0.2, 1.0);
  for (Arch arch : {Arch::FcGinv, Arch::ConvGinv, Arch::FcGavg, Arch::ConvGavg, Arch::Maron}) {
    Rng init(53 + static_cast<std::uint64_t>(arch));
    auto model = build_model<double>(arch, Task::Area, z4, 4, 2, 3, init);
    double err = model_input_grad_check(model, x, y, 1e-4);
    CHECK_MESSAGE(err <= 1e-4, to_string(arch), " worst rel err ", err);
  }
}

TEST_CASE("sigma-pi instrumentation:  multiplications and activation footprint") {
  Rng init(59);
  auto z5 = PermutationGroup::cyclic(5);
  auto model = build_fc_ginv<float>(z5, 5, 1, 64, init, Task::Poly);
  Tensor<float> one = Tensor<float>::uniform({1, 5, 1}, init);
  model.sigma_pi_mults = 0;
  model.predict(one);
  CHECK(model.sigma_pi_mults == 5u * 4u * 64u);  // m (n-1) n_mid
  CHECK(model.fin_activation_scalars_per_item == 5u * 5u * 64u);  // n^2 n_mid
}

TEST_CASE("checkpoint roundtrip is bit-exact") {
  namespace fs = std::filesystem;
  auto dir = fs::temp_directory_path() / "ginv_test_ckpt";
  fs::create_directories(dir);
  auto path = (dir / "model.ckpt").string();

  Rng init(61);
  auto z4 = PermutationGroup::cyclic(4);
  auto model = build_fc_ginv<float>(z4, 4, 2, 2, init, Task::Area);
  auto saved = model.snapshot();
  model.save_checkpoint_file(path);

  Rng init2(62);
  auto other = build_fc_ginv<float>(z4, 4, 2, 2, init2, Task::Area);
  other.load_checkpoint_file(path);
  for (std::size_t i = 0; i < saved.size(); ++i)
    CHECK((other.params[i].tensor.data() == saved[i].data()).all());

  // loading into a mismatched shape fails
  Rng init3(63);
  auto wrong = build_fc_ginv<float>(z4, 4, 2, 3, init3, Task::Area);
  CHECK_THROWS_AS(wrong.load_checkpoint_file(path), std::runtime_error);
  fs::remove_all(dir);
}

TEST_CASE("model builders validate the group degree") {
  Rng rng(67);
  CHECK_THROWS_AS(build_fc_ginv<float>(PermutationGroup::cyclic(4), 5, 1, 2, rng),
                  std::invalid_argument);
}

TEST_CASE("deterministic initialization per seed") {
  auto z4 = PermutationGroup::cyclic(4);
  Rng a(5), b(5), c(6);
  auto ma = build_fc_ginv<float>(z4, 4, 2, 2, a);
  auto mb = build_fc_ginv<float>(z4, 4, 2, 2, b);
  auto mc = build_fc_ginv<float>(z4, 4, 2, 2, c);
  for (std::size_t i = 0; i < ma.params.size(); ++i)
    CHECK((ma.params[i].tensor.data() == mb.params[i].tensor.data()).all());
  CHECK_FALSE((ma.params[0].tensor.data() == mc.params[0].tensor.data()).all());
}
