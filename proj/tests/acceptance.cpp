// Acceptance suite: one runnable check per release criterion, each printing
// a single [PASS]/[FAIL] line (details on the lines below it). Run all, or
// a subset with --only N (repeatable). Nonzero exit if any executed
// criterion fails.

#include <ginv/gradcheck.hpp>
#include <ginv/reproduce.hpp>
#include <ginv/verify.hpp>

#include <cstring>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace ginv;

namespace {

struct Criterion {
  int id;
  std::string label;
  std::function<bool(std::ostream&)> run;
};

std::vector<PermutationGroup> criterion_groups() {
  using PG = PermutationGroup;
  return {PG::cyclic(4),      PG::cyclic(5), PG::dihedral(4), PG::alternating(4), PG::symmetric(4),
          PG::direct_product(PG::symmetric(3), PG::symmetric(2))};
}

bool arch_supports_group(Arch arch, const PermutationGroup& G) {
  if (arch != Arch::ConvGinv) return true;
  // conv-ginv requires a cyclic-compatible group: the circular convolution
  // trunk is equivariant under the index cycle only
  return G.label() == "Z4" || G.label() == "Z5";
}

// --- C1 ---------------------------------------------------------------

bool c1_invariance(std::ostream& out) {
  bool ok = true;
  for (const auto& G : criterion_groups()) {
    for (Arch arch : {Arch::FcGinv, Arch::ConvGinv, Arch::FcGavg, Arch::ConvGavg, Arch::Maron}) {
      if (!arch_supports_group(arch, G)) {
        out << "    skip " << to_string(arch) << " x " << G.label()
            << " (build precondition: cyclic-compatible group)\n";
        continue;
      }
      const int n = G.degree();
      const int n_in = arch == Arch::Maron ? 1 : 2;
      Rng init(101 + static_cast<std::uint64_t>(arch));
      auto model = build_model<float>(arch, Task::Area, G, n, n_in, 3, init, /*maron_cap=*/30000);

      Rng rng(7);
      double before = invariance_max_residual(model, 100, rng);

      // brief training on synthetic targets; invariance is architectural
      Dataset ds;
      ds.task = "area";
      ds.n = n;
      ds.n_in = n_in;
      Rng drng(55);
      ds.train.inputs = Tensor<double>::uniform({32, n, n_in}, drng);
      ds.train.targets = Tensor<double>::uniform({32}, drng, 0.1, 1.0);
      ds.val = ds.train;
      ds.test = ds.train;
      TrainConfig cfg;
      cfg.epochs = 10;
      train_model(model, ds, cfg, 1);

      Rng rng2(9);
      double after = invariance_max_residual(model, 100, rng2);
      bool cell = before <= 1e-5 && after <= 1e-5;
      ok = ok && cell;
      out << "    " << (cell ? "ok  " : "FAIL") << " " << to_string(arch) << " x " << G.label()
          << ": residual init " << before << ", trained " << after << " (tol 1e-5)\n";
    }
  }
  return ok;
}

// --- C2 ---------------------------------------------------------------

bool c2_sigma_pi_oracle(std::ostream& out) {
  bool ok = true;
  Rng rng(202);
  for (const auto& G : criterion_groups()) {
    const Index n = G.degree();
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
      auto F = Tensor<double>::uniform({n, n, 3}, rng, -1.0, 1.0);
      Graph<double> g;
      auto fast = sigma_pi(g.constant(F), G);
      auto slow = sigma_pi_naive(F, G);
      for (Index c = 0; c < 3; ++c) {
        double denom = 1.0 + std::abs(slow[static_cast<std::size_t>(c)]);
        worst = std::max(worst, std::abs(fast.value()[c] - slow[static_cast<std::size_t>(c)]) / denom);
      }
    }
    bool cell = worst <= 1e-6;
    ok = ok && cell;
    out << "    " << (cell ? "ok  " : "FAIL") << " " << G.label() << ": worst relative deviation "
        << worst << " over 100 tensors (tol 1e-6)\n";
  }
  return ok;
}

// --- C3 ---------------------------------------------------------------

bool c3_complexity(std::ostream& out) {
  struct Case {
    PermutationGroup group;
    int n, n_in, n_mid;
    Arch arch;
    Task task;
  };
  std::vector<Case> cases;
  cases.push_back({PermutationGroup::cyclic(5), 5, 1, 64, Arch::FcGinv, Task::Poly});
  cases.push_back({PermutationGroup::cyclic(4), 4, 2, 2, Arch::ConvGinv, Task::Area});
  cases.push_back({benchmark_group("PS4"), 5, 1, 2, Arch::FcGinv, Task::Poly});
  bool ok = true;
  for (auto& c : cases) {
    Rng init(303);
    auto model = build_model<float>(c.arch, c.task, c.group, c.n, c.n_in, c.n_mid, init);
    RunMetrics m;
    snapshot_instrumentation(model, m);
    const std::uint64_t expect_mults = c.group.order() * static_cast<std::uint64_t>(c.n - 1) *
                                       static_cast<std::uint64_t>(c.n_mid);
    const std::uint64_t expect_act =
        static_cast<std::uint64_t>(c.n) * static_cast<std::uint64_t>(c.n) *
        static_cast<std::uint64_t>(c.n_mid);
    bool cell =
        m.sigma_pi_mults_per_item == expect_mults && m.fin_activation_scalars_per_item == expect_act;
    ok = ok && cell;
    out << "    " << (cell ? "ok  " : "FAIL") << " " << to_string(c.arch) << " n=" << c.n
        << " m=" << c.group.order() << " n_mid=" << c.n_mid << ": mults "
        << m.sigma_pi_mults_per_item << " (expect " << expect_mults << "), activation "
        << m.fin_activation_scalars_per_item << " scalars (expect " << expect_act << ")\n";
  }
  return ok;
}

// --- C4 ---------------------------------------------------------------

bool c4_gradchecks(std::ostream& out) {
  bool ok = true;
  auto report = [&](const std::string& name, double err, double tol) {
    bool cell = err <= tol;
    ok = ok && cell;
    out << "    " << (cell ? "ok  " : "FAIL") << " " << name << ": worst rel err " << err
        << " (tol " << tol << ")\n";
  };

  Rng rng(404);
  // individual layers at eps 1e-6
  {
    auto W = Tensor<double>::uniform({3, 4}, rng, -1, 1);
    auto b = Tensor<double>::uniform({4}, rng, -1, 1);
    auto x = Tensor<double>::uniform({5, 3}, rng, -1, 1);
    report("affine",
           grad_check<double>(
               [&](Graph<double>& g, Var<double> v) {
                 return mean_all(affine(v, g.constant(W), g.constant(b)));
               },
               x, 1e-6),
           1e-4);
    report("tanh",
           grad_check<double>(
               [](Graph<double>&, Var<double> v) { return sum_all(tanh_act(v)); }, x, 1e-6),
           1e-4);
  }
  {
    auto K = Tensor<double>::uniform({3, 2, 3}, rng, -1, 1);
    auto cb = Tensor<double>::uniform({3}, rng, -1, 1);
    auto cx = Tensor<double>::uniform({6, 2}, rng, -1, 1);
    report("conv1d_valid (input)",
           grad_check<double>(
               [&](Graph<double>& g, Var<double> v) {
                 return sum_all(conv1d_valid(v, g.constant(K), g.constant(cb)));
               },
               cx, 1e-6),
           1e-4);
    report("conv1d_valid (kernels)",
           grad_check<double>(
               [&](Graph<double>& g, Var<double> v) {
                 return sum_all(conv1d_valid(g.constant(cx), v, g.constant(cb)));
               },
               K, 1e-6),
           1e-4);
    report("circular_pad + conv1d",
           grad_check<double>(
               [&](Graph<double>& g, Var<double> v) {
                 return sum_all(conv1d_valid(circular_pad(v, 3), g.constant(K), g.constant(cb)));
               },
               cx, 1e-6),
           1e-4);
  }
  {
    auto x = Tensor<double>::uniform({4, 3, 2}, rng, -1, 1);
    x[7] = 0.0;  // exercise the zero-factor path
    report("reduce_prod (with a zero entry)",
           grad_check<double>(
               [](Graph<double>&, Var<double> v) { return sum_all(reduce_prod(v, 1)); }, x, 1e-6),
           1e-4);
    report("reduce_sum",
           grad_check<double>(
               [](Graph<double>&, Var<double> v) { return sum_all(reduce_sum(v, 2)); }, x, 1e-6),
           1e-4);
    report("gather + reshape",
           grad_check<double>(
               [](Graph<double>&, Var<double> v) {
                 auto picked = gather(v, 1, {0, 0, 2});
                 return mean_all(reshape(picked, {picked.value().size()}));
               },
               x, 1e-6),
           1e-4);
  }
  {
    auto G = PermutationGroup::dihedral(4);
    auto F = Tensor<double>::uniform({4, 4, 2}, rng, -1, 1);
    F[5] = 0.0;
    report("sigma_pi",
           grad_check<double>(
               [&](Graph<double>&, Var<double> v) { return sum_all(sigma_pi(v, G)); }, F, 1e-6),
           1e-4);
    auto W = Tensor<double>::uniform({8, 1}, rng, -1, 1);
    auto x = Tensor<double>::uniform({4, 2}, rng, -1, 1);
    report("reynolds_average",
           grad_check<double>(
               [&](Graph<double>& g, Var<double> v) {
                 auto inner = [&](Var<double> xg) {
                   return sum_all(tanh_act(affine(reshape(xg, {1, 8}), g.constant(W),
                                                  g.constant(Tensor<double>::zeros({1})))));
                 };
                 return reynolds_average(G, v, inner);
               },
               x, 1e-6),
           1e-4);
  }
  {
    auto polys = std::make_shared<std::vector<InvariantPolynomial>>(
        generating_candidates(PermutationGroup::cyclic(3), 3, 3));
    auto x = Tensor<double>::uniform({4, 3}, rng, 0.2, 1.0);
    report("invariant polynomial features",
           grad_check<double>(
               [&](Graph<double>&, Var<double> v) {
                 return mean_all(invariant_features(v, polys.get()));
               },
               x, 1e-6),
           1e-4);
  }

  // full architectures (params and input) at eps 1e-4
  auto z4 = PermutationGroup::cyclic(4);
  auto xb = Tensor<double>::uniform({6, 4, 2}, rng, 0.1, 1.0);
  auto yb = Tensor<double>::uniform({6}, rng, 0.2, 1.0);
  for (Arch arch : {Arch::FcGinv, Arch::ConvGinv, Arch::FcGavg, Arch::ConvGavg, Arch::Maron}) {
    Rng init(505 + static_cast<std::uint64_t>(arch));
    auto model = build_model<double>(arch, Task::Area, z4, 4, 2, 3, init);
    report(to_string(arch) + " (parameters)", model_param_grad_check(model, xb, yb, 1e-5, 1e-4),
           1e-4);
    report(to_string(arch) + " (input)", model_input_grad_check(model, xb, yb, 1e-4), 1e-4);
  }
  return ok;
}

// --- C5 ---------------------------------------------------------------

bool c5_param_counts(std::ostream& out) {
  Rng rng(606);
  auto z4 = PermutationGroup::cyclic(4);
  auto z5 = PermutationGroup::cyclic(5);
  bool ok = true;
  auto exact = [&](const std::string& name, Index got, Index expect) {
    bool cell = got == expect;
    ok = ok && cell;
    out << "    " << (cell ? "ok  " : "FAIL") << " " << name << ": " << got << " (expect exactly "
        << expect << ")\n";
  };
  auto within = [&](const std::string& name, Index got, double target, double frac) {
    bool cell = std::abs(static_cast<double>(got) - target) <= frac * target;
    ok = ok && cell;
    out << "    " << (cell ? "ok  " : "FAIL") << " " << name << ": " << got << " (expect "
        << target << " within " << frac * 100 << "%)\n";
  };
  exact("fc-ginv area", build_fc_ginv<float>(z4, 4, 2, 2, rng, Task::Area).param_count(), 1785);
  exact("conv-ginv area", build_conv_ginv<float>(z4, 4, 2, 2, rng, Task::Area).param_count(), 1673);
  exact("fc-gavg area", build_fc_gavg<float>(Task::Area, z4, 4, 2, rng).param_count(), 1765);
  within("fc-ginv poly", build_fc_ginv<float>(z5, 5, 1, 64, rng, Task::Poly).param_count(), 24000,
         0.01);
  within("fc-gavg poly", build_fc_gavg<float>(Task::Poly, z5, 5, 1, rng).param_count(), 24000, 0.01);
  within("conv-ginv poly", build_conv_ginv<float>(z5, 5, 1, 118, rng, Task::Poly).param_count(),
         24000, 0.05);
  return ok;
}

// --- C6..C10: benchmark reproductions ---------------------------------

SuiteOptions acceptance_suite_options() {
  SuiteOptions opts;  // published defaults: 10 seeds, 2500/300 epochs, seed 444
  opts.verbose = true;
  return opts;
}

bool render_gates(std::ostream& out, const std::vector<GateResult>& gates) {
  bool ok = true;
  for (const auto& g : gates) {
    ok = ok && g.pass;
    out << "    " << (g.pass ? "ok  " : "FAIL") << " " << g.name << " -- " << g.detail << "\n";
  }
  return ok;
}

bool c6_table1(std::ostream& out) {
  auto rows = run_table1(acceptance_suite_options(), /*include_maron=*/false);
  for (const auto& r : rows)
    out << "    " << r.arch << " test MAE " << r.result.test_mae.mean << " +- "
        << r.result.test_mae.stdev << "\n";
  return render_gates(out, evaluate_table1_gates(rows));
}

bool c7_table2(std::ostream& out) {
  auto rows = run_table2(acceptance_suite_options());
  for (const auto& r : rows)
    out << "    " << r.arch << " test MAE " << r.result.test_mae.mean << " +- "
        << r.result.test_mae.stdev << "\n";
  return render_gates(out, evaluate_table2_gates(rows));
}

bool c8_table3(std::ostream& out) {
  auto rows = run_table3(acceptance_suite_options());
  for (const auto& r : rows)
    out << "    " << r.poly << " (|G|=" << r.group_order << ") test MAPE "
        << r.result.test_mape.mean << "%, latency " << r.result.latency_mean_ms << " ms\n";
  return render_gates(out, evaluate_table3_gates(rows));
}

bool c9_table4(std::ostream& out) {
  auto rows = run_table4(acceptance_suite_options());
  for (const auto& r : rows)
    out << "    n_mid=" << r.n_mid << ": conv " << r.conv.test_mae.mean << ", fc "
        << r.fc.test_mae.mean << "\n";
  return render_gates(out, evaluate_table4_gates(rows));
}

bool c10_fig3(std::ostream& out) {
  auto rows = run_fig3(acceptance_suite_options());
  for (const auto& r : rows)
    out << "    " << r.poly << " final val MAPE " << r.result.val_mape.mean << "%\n";
  return render_gates(out, evaluate_fig3_gates(rows));
}

// --- C11 ---------------------------------------------------------------

bool c11_data_oracles(std::ostream& out) {
  Rng gen_rng(444);
  Rng mc_rng(445);
  double worst = 0;
  bool ranges_ok = true;
  for (int t = 0; t < 1000; ++t) {
    auto q = gen_quadrangle(gen_rng);
    for (const auto& v : q.v)
      ranges_ok = ranges_ok && v[0] >= 0.0 && v[0] <= 2.0 && v[1] >= 0.0 && v[1] <= 2.0;
    const double exact = shoelace_area(q);
    ranges_ok = ranges_ok && exact > 0.0 && exact <= 1.0;
    worst = std::max(worst, std::abs(mc_area(q, 100000, mc_rng) - exact));
  }
  bool mc_ok = worst <= 0.01;
  out << "    " << (mc_ok ? "ok  " : "FAIL")
      << " Monte-Carlo vs shoelace: worst |delta| = " << worst
      << " over 1000 quadrangles at 100k samples (tol 0.01)\n";
  out << "    " << (ranges_ok ? "ok  " : "FAIL")
      << " all coordinates in [0,2], all areas in (0,1]\n";
  return mc_ok && ranges_ok;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int a = 1; a < argc; ++a) {
    if (std::strcmp(argv[a], "--only") == 0 && a + 1 < argc) {
      only.insert(std::atoi(argv[++a]));
    } else if (std::strcmp(argv[a], "--list") == 0) {
      std::cout << "criteria: 1..11\n";
      return 0;
    } else {
      std::cerr << "usage: ginv_acceptance [--only N]...\n";
      return 2;
    }
  }

  std::vector<Criterion> criteria = {
      {1, "invariance of every architecture at init and after training", c1_invariance},
      {2, "vectorized sum-product layer matches the naive oracle", c2_sigma_pi_oracle},
      {3, "sum-product multiplication count and activation footprint", c3_complexity},
      {4, "finite-difference gradient checks (layers and architectures)", c4_gradchecks},
      {5, "published parameter counts", c5_param_counts},
      {6, "polynomial benchmark reproduction (2500 epochs, 10 seeds)", c6_table1},
      {7, "area benchmark reproduction (300 epochs, 10 seeds)", c7_table2},
      {8, "group-size sweep: accuracy bands and latency flatness", c8_table3},
      {9, "latent-size sweep: conv flatness and fc n_mid=1 degradation", c9_table4},
      {10, "hierarchical-invariance learning (Z3 / S3 / S3xS2)", c10_fig3},
      {11, "dataset oracles: Monte-Carlo area vs shoelace, ranges", c11_data_oracles},
  };

  bool all_ok = true;
  for (auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    std::ostringstream detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail << "    exception: " << e.what() << "\n";
      ok = false;
    }
    all_ok = all_ok && ok;
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << "C" << c.id << ": " << c.label << "\n"
              << detail.str();
    std::cout.flush();
  }
  return all_ok ? 0 : 1;
}
