#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ginv/config.hpp"
#include "ginv/reference_values.hpp"
#include "ginv/train.hpp"
#include "ginv/verify.hpp"

namespace ginv {

/// Shared knobs for the benchmark reproduction suites. The defaults are the
/// published operating points; seeds/epochs can be reduced for smoke runs.
struct SuiteOptions {
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  int poly_epochs = 2500;
  int area_epochs = 300;
  std::uint64_t data_seed = 444;
  Index mc_samples = 100000;
  bool verbose = true;

  TrainConfig train_config(bool poly) const {
    TrainConfig cfg;
    cfg.epochs = poly ? poly_epochs : area_epochs;
    cfg.batch_size = 16;
    cfg.lr = 1e-3;
    cfg.l2 = 1e-5;
    cfg.seeds = seeds;
    return cfg;
  }
};

namespace detail {

inline void progress(const SuiteOptions& opts, const std::string& line) {
  static std::mutex mu;
  if (!opts.verbose) return;
  std::lock_guard<std::mutex> lock(mu);
  std::fprintf(stderr, "%s\n", line.c_str());
  std::fflush(stderr);
}

inline std::function<void(std::size_t, const RunMetrics&)> seed_progress(const SuiteOptions& opts,
                                                                         std::string tag) {
  return [&opts, tag](std::size_t s, const RunMetrics& m) {
    std::ostringstream out;
    out << "  [" << tag << "] seed " << s << " done: val MAE " << m.val_final.mae << " (best epoch "
        << m.best_epoch << ")";
    progress(opts, out.str());
  };
}

}  // namespace detail

struct ArchResult {
  std::string arch;
  ExperimentResult result;
};

/// One gated check of a reproduction target.
struct GateResult {
  std::string name;
  bool pass;
  std::string detail;
};

// ---------------------------------------------------------------------------
// Table 1: polynomial regression (PZ5), all five architectures
// ---------------------------------------------------------------------------

inline std::vector<ArchResult> run_table1(const SuiteOptions& opts, bool include_maron = true) {
  auto data = gen_poly_dataset("PZ5", {16, 480, 4800}, opts.data_seed);
  auto z5 = PermutationGroup::cyclic(5);
  auto cfg = opts.train_config(/*poly=*/true);
  std::vector<ArchResult> rows;
  auto run = [&](Arch arch, int n_mid) {
    detail::progress(opts, "[table1] " + to_string(arch));
    rows.push_back({to_string(arch),
                    run_experiment<float>(arch, Task::Poly, z5, 5, 1, n_mid, data, cfg, 20000, true,
                                          nullptr, detail::seed_progress(opts, to_string(arch)))});
  };
  run(Arch::FcGavg, 0);
  run(Arch::FcGinv, 64);
  run(Arch::ConvGavg, 0);
  run(Arch::ConvGinv, 118);
  if (include_maron) run(Arch::Maron, 0);
  return rows;
}

inline std::vector<GateResult> evaluate_table1_gates(const std::vector<ArchResult>& rows) {
  std::map<std::string, double> mae;
  for (const auto& r : rows) mae[r.arch] = r.result.test_mae.mean;
  std::vector<GateResult> gates;
  auto fmt = [](double v) {
    std::ostringstream o;
    o << v;
    return o.str();
  };
  gates.push_back({"conv-ginv test MAE <= 0.052", mae.at("conv-ginv") <= 0.052,
                   "measured " + fmt(mae.at("conv-ginv"))});
  gates.push_back(
      {"fc-ginv test MAE <= 0.15", mae.at("fc-ginv") <= 0.15, "measured " + fmt(mae.at("fc-ginv"))});
  bool ordering = mae.at("conv-ginv") < mae.at("fc-gavg") && mae.at("conv-ginv") < mae.at("conv-gavg") &&
                  mae.at("fc-ginv") < mae.at("fc-gavg") && mae.at("fc-ginv") < mae.at("conv-gavg");
  gates.push_back({"both G-inv beat both G-avg on test MAE", ordering,
                   "ginv " + fmt(mae.at("fc-ginv")) + "/" + fmt(mae.at("conv-ginv")) + " vs gavg " +
                       fmt(mae.at("fc-gavg")) + "/" + fmt(mae.at("conv-gavg"))});
  return gates;
}

// ---------------------------------------------------------------------------
// Table 2: quadrangle area estimation, all five architectures
// ---------------------------------------------------------------------------

inline std::vector<ArchResult> run_table2(const SuiteOptions& opts) {
  auto data = gen_area_dataset({256, 256, 1024}, opts.data_seed, opts.mc_samples);
  auto z4 = PermutationGroup::cyclic(4);
  auto cfg = opts.train_config(/*poly=*/false);
  std::vector<ArchResult> rows;
  auto run = [&](Arch arch, int n_mid) {
    detail::progress(opts, "[table2] " + to_string(arch));
    rows.push_back({to_string(arch),
                    run_experiment<float>(arch, Task::Area, z4, 4, 2, n_mid, data, cfg, 20000, true,
                                          nullptr, detail::seed_progress(opts, to_string(arch)))});
  };
  run(Arch::FcGavg, 0);
  run(Arch::FcGinv, 2);
  run(Arch::ConvGavg, 0);
  run(Arch::ConvGinv, 2);
  run(Arch::Maron, 0);
  return rows;
}

inline std::vector<GateResult> evaluate_table2_gates(const std::vector<ArchResult>& rows) {
  std::map<std::string, double> mae;
  for (const auto& r : rows) mae[r.arch] = r.result.test_mae.mean;
  std::vector<GateResult> gates;
  auto fmt = [](double v) {
    std::ostringstream o;
    o << v;
    return o.str();
  };
  gates.push_back({"conv-ginv test MAE <= 0.015", mae.at("conv-ginv") <= 0.015,
                   "measured " + fmt(mae.at("conv-ginv"))});
  bool ordering = mae.at("conv-ginv") < mae.at("fc-gavg") && mae.at("fc-gavg") < mae.at("maron");
  gates.push_back({"ordering conv-ginv < fc-gavg < maron", ordering,
                   fmt(mae.at("conv-ginv")) + " < " + fmt(mae.at("fc-gavg")) + " < " +
                       fmt(mae.at("maron"))});
  return gates;
}

// ---------------------------------------------------------------------------
// Table 3: FC G-inv across group sizes (PZ5, PD8, PA4, PS4), n_mid = 2
// ---------------------------------------------------------------------------

struct GroupSweepRow {
  std::string poly;
  std::size_t group_order = 0;
  ExperimentResult result;
};

inline std::vector<GroupSweepRow> run_table3(const SuiteOptions& opts) {
  auto cfg = opts.train_config(/*poly=*/true);
  std::vector<GroupSweepRow> rows;
  for (const std::string poly : {"PZ5", "PD8", "PA4", "PS4"}) {
    detail::progress(opts, "[table3] " + poly);
    auto data = gen_poly_dataset(poly, {16, 480, 4800}, opts.data_seed);
    auto G = benchmark_group(poly);
    GroupSweepRow row;
    row.poly = poly;
    row.group_order = G.order();
    row.result = run_experiment<float>(Arch::FcGinv, Task::Poly, G, 5, 1, 2, data, cfg, 20000, true,
                                       nullptr, detail::seed_progress(opts, poly));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<GateResult> evaluate_table3_gates(const std::vector<GroupSweepRow>& rows) {
  std::vector<GateResult> gates;
  double lat_min = rows.front().result.latency_mean_ms, lat_max = lat_min;
  for (const auto& row : rows) {
    lat_min = std::min(lat_min, row.result.latency_mean_ms);
    lat_max = std::max(lat_max, row.result.latency_mean_ms);
  }
  for (const auto& row : rows) {
    double measured = row.result.test_mape.mean;
    double limit = 0;
    for (const auto& ref : reference_table3())
      if (ref.poly == row.poly) limit = 3.0 * ref.test_mape_mean;
    std::ostringstream d;
    d << "measured " << measured << "% vs limit " << limit << "%";
    gates.push_back({row.poly + " test MAPE finite and <= 3x published mean",
                     std::isfinite(measured) && measured <= limit, d.str()});
  }
  std::ostringstream d;
  d << "latency " << lat_min << ".." << lat_max << " ms";
  gates.push_back({"latency flat: max/min <= 1.5 across group sizes",
                   lat_max <= 1.5 * lat_min, d.str()});
  return gates;
}

// ---------------------------------------------------------------------------
// Table 4: latent-size sweep on the area task, both G-inv variants
// ---------------------------------------------------------------------------

struct LatentSweepRow {
  int n_mid = 0;
  ExperimentResult conv, fc;
};

inline std::vector<LatentSweepRow> run_table4(const SuiteOptions& opts) {
  auto data = gen_area_dataset({256, 256, 1024}, opts.data_seed, opts.mc_samples);
  auto z4 = PermutationGroup::cyclic(4);
  auto cfg = opts.train_config(/*poly=*/false);
  std::vector<LatentSweepRow> rows;
  for (int n_mid : {1, 2, 8, 32, 128}) {
    detail::progress(opts, "[table4] n_mid=" + std::to_string(n_mid));
    LatentSweepRow row;
    row.n_mid = n_mid;
    row.conv = run_experiment<float>(Arch::ConvGinv, Task::Area, z4, 4, 2, n_mid, data, cfg, 20000,
                                     true, nullptr,
                                     detail::seed_progress(opts, "conv n_mid=" + std::to_string(n_mid)));
    row.fc = run_experiment<float>(Arch::FcGinv, Task::Area, z4, 4, 2, n_mid, data, cfg, 20000, true,
                                   nullptr,
                                   detail::seed_progress(opts, "fc n_mid=" + std::to_string(n_mid)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<GateResult> evaluate_table4_gates(const std::vector<LatentSweepRow>& rows) {
  std::vector<GateResult> gates;
  double conv_min = rows.front().conv.test_mae.mean, conv_max = conv_min;
  double fc_at_1 = 0, fc_at_8 = 0;
  for (const auto& row : rows) {
    conv_min = std::min(conv_min, row.conv.test_mae.mean);
    conv_max = std::max(conv_max, row.conv.test_mae.mean);
    if (row.n_mid == 1) fc_at_1 = row.fc.test_mae.mean;
    if (row.n_mid == 8) fc_at_8 = row.fc.test_mae.mean;
  }
  std::ostringstream a;
  a << "conv test MAE range " << conv_min << ".." << conv_max;
  gates.push_back({"conv-ginv test MAE varies by <= 25% across n_mid",
                   conv_max <= 1.25 * conv_min, a.str()});
  std::ostringstream b;
  b << "fc n_mid=1: " << fc_at_1 << ", n_mid=8: " << fc_at_8;
  gates.push_back({"fc-ginv MAE at n_mid=1 >= 2.5x its MAE at n_mid=8",
                   fc_at_1 >= 2.5 * fc_at_8, b.str()});
  return gates;
}

// ---------------------------------------------------------------------------
// Fig 3: FC S3-inv on the Z3 / S3 / S3xS2 polynomials (train count 160)
// ---------------------------------------------------------------------------

struct HierarchyRow {
  std::string poly;
  ExperimentResult result;
  // mean |f(swap45(x)) - f(x)| over the test inputs, averaged over seeds
  double swap45_sensitivity = 0;
};

inline std::vector<HierarchyRow> run_fig3(const SuiteOptions& opts) {
  auto s3 = PermutationGroup::direct_product(PermutationGroup::symmetric(3),
                                             PermutationGroup::trivial(2));
  auto cfg = opts.train_config(/*poly=*/true);
  // x4 <-> x5 swap, identity on the S3 block
  Permutation swap45({0, 1, 2, 4, 3});
  std::vector<HierarchyRow> rows;
  for (const std::string poly : {"PZ3", "PS3", "PS3xS2"}) {
    detail::progress(opts, "[fig3] " + poly);
    auto data = gen_poly_dataset(poly, {160, 480, 4800}, opts.data_seed);
    HierarchyRow row;
    row.poly = poly;
    std::vector<Model<float>> models;
    row.result = run_experiment<float>(Arch::FcGinv, Task::Poly, s3, 5, 1, 8, data, cfg, 20000, true,
                                       &models, detail::seed_progress(opts, poly));
    double sens = 0;
    auto test_x = data.test.inputs.cast<float>();
    for (auto& m : models) {
      auto base = m.predict(test_x);
      auto moved = m.predict(act_on_rows(swap45, test_x));
      double acc = 0;
      for (Index i = 0; i < base.dim(0); ++i)
        acc += std::abs(static_cast<double>(base[i]) - static_cast<double>(moved[i]));
      sens += acc / static_cast<double>(base.dim(0));
    }
    row.swap45_sensitivity = sens / static_cast<double>(models.size());
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<GateResult> evaluate_fig3_gates(const std::vector<HierarchyRow>& rows) {
  std::map<std::string, const HierarchyRow*> by_poly;
  for (const auto& r : rows) by_poly[r.poly] = &r;
  const double s3 = by_poly.at("PS3")->result.val_mape.mean;
  const double s3xs2 = by_poly.at("PS3xS2")->result.val_mape.mean;
  const double z3 = by_poly.at("PZ3")->result.val_mape.mean;
  std::vector<GateResult> gates;
  std::ostringstream a;
  a << "S3xS2 " << s3xs2 << "% vs S3 " << s3 << "%";
  gates.push_back({"final val MAPE on S3xS2 within 2x of S3", s3xs2 <= 2.0 * s3, a.str()});
  std::ostringstream b;
  b << "Z3 " << z3 << "% vs S3 " << s3 << "%";
  gates.push_back({"final val MAPE on Z3 >= 3x worse than S3", z3 >= 3.0 * s3, b.str()});
  const auto& learned = *by_poly.at("PS3xS2");
  std::ostringstream c;
  c << "swap(4,5) sensitivity " << learned.swap45_sensitivity << " vs 3x test MAE "
    << 3.0 * learned.result.test_mae.mean;
  gates.push_back({"trained S3-inv model on S3xS2 data is approximately S3xS2-invariant",
                   learned.swap45_sensitivity <= 3.0 * learned.result.test_mae.mean, c.str()});
  return gates;
}

// ---------------------------------------------------------------------------
// report rendering
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace detail

inline nlohmann::json experiment_json(const ExperimentResult& r) {
  nlohmann::json j;
  j["train_mae"] = {{"mean", r.train_mae.mean}, {"std", r.train_mae.stdev}};
  j["val_mae"] = {{"mean", r.val_mae.mean}, {"std", r.val_mae.stdev}};
  j["test_mae"] = {{"mean", r.test_mae.mean}, {"std", r.test_mae.stdev}};
  j["train_mape"] = {{"mean", r.train_mape.mean}, {"std", r.train_mape.stdev}};
  j["val_mape"] = {{"mean", r.val_mape.mean}, {"std", r.val_mape.stdev}};
  j["test_mape"] = {{"mean", r.test_mape.mean}, {"std", r.test_mape.stdev}};
  j["latency_ms"] = {{"mean", r.latency_mean_ms}, {"std", r.latency_std_ms}};
  j["param_count"] = r.param_count;
  j["sigma_pi_mults_per_item"] = r.sigma_pi_mults_per_item;
  j["fin_activation_scalars_per_item"] = r.fin_activation_scalars_per_item;
  j["best_epochs"] = nlohmann::json::array();
  for (const auto& m : r.per_seed) j["best_epochs"].push_back(m.best_epoch);
  return j;
}

/// Per-epoch curve CSV: epoch, train_mae, val_mae, train_mape, val_mape.
inline void write_curve_csv(const RunMetrics& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "epoch,train_mae,val_mae,train_mape,val_mape\n";
  out.precision(10);
  for (std::size_t e = 0; e < m.curve.size(); ++e)
    out << e << "," << m.curve[e].train_mae << "," << m.curve[e].val_mae << ","
        << m.curve[e].train_mape << "," << m.curve[e].val_mape << "\n";
}

inline void write_gates_markdown(std::ostream& out, const std::vector<GateResult>& gates) {
  out << "\n## Checks\n\n| check | verdict | detail |\n|---|---|---|\n";
  for (const auto& g : gates)
    out << "| " << g.name << " | " << (g.pass ? "PASS" : "FAIL") << " | " << g.detail << " |\n";
}

}  // namespace ginv
