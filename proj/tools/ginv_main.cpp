// Command-line front end: dataset generation, configured training runs,
// benchmark reproduction suites, group and invariant inspection.

#include <CLI11.hpp>
#include <json.hpp>

#include <ginv/config.hpp>
#include <ginv/reproduce.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace ginv;

namespace {

struct BadInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::array<Index, 3> parse_counts(const std::string& s) {
  std::array<Index, 3> counts{};
  std::istringstream in(s);
  std::string tok;
  int i = 0;
  while (std::getline(in, tok, ',') && i < 3) counts[static_cast<std::size_t>(i++)] = std::stoll(tok);
  if (i != 3) throw BadInput("counts must be three comma-separated integers, got '" + s + "'");
  return counts;
}

// ---------------------------------------------------------------------------
// gen-data
// ---------------------------------------------------------------------------

int cmd_gen_data(const std::string& task, const std::string& poly, std::uint64_t seed,
                 const std::string& counts_str, Index mc_samples, const std::string& out_dir,
                 bool csv) {
  fs::create_directories(out_dir);
  Dataset ds;
  std::string stem;
  if (task == "poly") {
    auto counts = counts_str.empty() ? std::array<Index, 3>{16, 480, 4800} : parse_counts(counts_str);
    ds = gen_poly_dataset(poly, counts, seed);
    stem = poly;
  } else if (task == "area") {
    auto counts = counts_str.empty() ? std::array<Index, 3>{256, 256, 1024} : parse_counts(counts_str);
    ds = gen_area_dataset(counts, seed, mc_samples);
    stem = "area";
  } else {
    throw BadInput("unknown task '" + task + "'");
  }
  const std::string prefix = (fs::path(out_dir) / (stem + "_seed" + std::to_string(seed))).string();
  save_dataset(ds, prefix);
  std::cout << "wrote " << prefix << "_{train,val,test}.ginvds (" << ds.train.count() << "/"
            << ds.val.count() << "/" << ds.test.count() << " items)\n";
  if (csv) {
    export_csv(ds, ds.train, prefix + "_train.csv");
    export_csv(ds, ds.val, prefix + "_val.csv");
    export_csv(ds, ds.test, prefix + "_test.csv");
    std::cout << "wrote " << prefix << "_{train,val,test}.csv\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

template <typename Scalar>
int run_train(const ExperimentConfig& cfg) {
  if (!cfg.data_path.empty()) {
    for (const char* split : {"_train.ginvds", "_val.ginvds", "_test.ginvds"}) {
      const std::string p = cfg.data_path + split;
      if (!fs::exists(p)) throw BadInput("dataset not found: " + p);
    }
  }
  auto data = cfg.make_dataset();
  auto group = parse_group(cfg.group);
  auto arch = parse_arch(cfg.arch);
  auto task = parse_task(cfg.task);
  auto tc = cfg.train_config();

  fs::create_directories(cfg.out);
  SuiteOptions progress_opts;  // reuse the progress printer
  std::vector<Model<Scalar>> models;
  auto result = run_experiment<Scalar>(arch, task, group, cfg.n, cfg.n_in, cfg.n_mid, data, tc,
                                       20000, true, &models,
                                       detail::seed_progress(progress_opts, cfg.arch));

  nlohmann::json summary;
  summary["config"] = serialize_config(cfg);
  summary["group"] = group.label();
  summary["group_order"] = group.order();
  summary["metrics"] = experiment_json(result);
  std::ofstream json_out(fs::path(cfg.out) / "summary.json");
  json_out << summary.dump(2) << "\n";

  for (std::size_t s = 0; s < tc.seeds.size(); ++s) {
    const std::string tag = std::to_string(tc.seeds[s]);
    write_curve_csv(result.per_seed[s], (fs::path(cfg.out) / ("curves_seed" + tag + ".csv")).string());
    models[s].save_checkpoint_file((fs::path(cfg.out) / ("model_seed" + tag + ".ckpt")).string());
  }

  std::cout << "test MAE " << result.test_mae.mean << " +- " << result.test_mae.stdev
            << "  (val " << result.val_mae.mean << ", params " << result.param_count << ")\n"
            << "wrote " << cfg.out << "/summary.json\n";
  return 0;
}

int cmd_train(const ExperimentConfig& cfg) {
  if (cfg.precision == "f64") return run_train<double>(cfg);
  return run_train<float>(cfg);
}

// ---------------------------------------------------------------------------
// reproduce
// ---------------------------------------------------------------------------

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out << text;
}

std::string pm(double mean, double spread) {
  std::ostringstream o;
  o << detail::fmt3(mean) << " +- " << detail::fmt3(spread);
  return o.str();
}

int cmd_reproduce(const std::string& target, SuiteOptions opts, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::ostringstream md;
  nlohmann::json j;
  std::vector<GateResult> gates;

  if (target == "table1" || target == "table2") {
    const bool poly = target == "table1";
    auto rows = poly ? run_table1(opts) : run_table2(opts);
    gates = poly ? evaluate_table1_gates(rows) : evaluate_table2_gates(rows);
    const auto& refs = poly ? reference_table1() : reference_table2();
    const auto& ref_counts = poly ? reference_param_counts_poly() : reference_param_counts_area();
    md << "# " << (poly ? "Polynomial regression" : "Quadrangle area") << " benchmark\n\n";
    md << "Setup: "
       << (poly ? "PZ5, 16/480/4800 items, 2500 epochs" : "Z4, 256/256/1024 items, 300 epochs")
       << ", " << opts.seeds.size() << " seeds, Adam lr 1e-3, l2 1e-5, batch 16.\n\n";
    md << "| network | test MAE measured | published (source) | #weights | published #weights |\n";
    md << "|---|---|---|---|---|\n";
    for (const auto& row : rows) {
      const Reference* ref = nullptr;
      for (const auto& r : refs)
        if (r.arch == row.arch) ref = &r;
      const ReferenceCount* rc = nullptr;
      for (const auto& r : ref_counts)
        if (r.arch == row.arch) rc = &r;
      md << "| " << row.arch << " | " << pm(row.result.test_mae.mean, row.result.test_mae.stdev)
         << " | " << (ref ? pm(ref->mean, ref->spread) + " (" + ref->source + ")" : "-") << " | "
         << row.result.param_count << " | "
         << (rc ? (rc->count >= 0 ? std::to_string(rc->count) : detail::fmt3(rc->rounded_k) + "k")
                : "-")
         << " |\n";
      j["rows"][row.arch] = experiment_json(row.result);
    }
  } else if (target == "table3") {
    auto rows = run_table3(opts);
    gates = evaluate_table3_gates(rows);
    md << "# Group-size sweep (FC G-inv, n_mid = 2)\n\n";
    md << "| polynomial | group order | test MAPE measured | published (source) | latency ms | published ms |\n";
    md << "|---|---|---|---|---|---|\n";
    for (const auto& row : rows) {
      const ReferenceGroupRow* ref = nullptr;
      for (const auto& r : reference_table3())
        if (r.poly == row.poly) ref = &r;
      md << "| " << row.poly << " | " << row.group_order << " | "
         << pm(row.result.test_mape.mean, row.result.test_mape.stdev) << " | "
         << (ref ? pm(ref->test_mape_mean, ref->test_mape_spread) + " (" + ref->source + ")" : "-")
         << " | " << pm(row.result.latency_mean_ms, row.result.latency_std_ms) << " | "
         << (ref ? pm(ref->time_ms_mean, ref->time_ms_spread) : "-") << " |\n";
      j["rows"][row.poly] = experiment_json(row.result);
    }
    md << "\nPublished latencies are device-specific; only the flatness ratio is checked.\n";
  } else if (target == "table4") {
    auto rows = run_table4(opts);
    gates = evaluate_table4_gates(rows);
    md << "# Latent-size sweep (area task)\n\n";
    md << "| n_mid | conv-ginv MAE | published | fc-ginv MAE | published | source |\n";
    md << "|---|---|---|---|---|---|\n";
    for (const auto& row : rows) {
      const ReferenceLatentRow* ref = nullptr;
      for (const auto& r : reference_table4())
        if (r.n_mid == row.n_mid) ref = &r;
      md << "| " << row.n_mid << " | " << pm(row.conv.test_mae.mean, row.conv.test_mae.stdev)
         << " | " << (ref ? pm(ref->conv_mae_mean, ref->conv_mae_spread) : "-") << " | "
         << pm(row.fc.test_mae.mean, row.fc.test_mae.stdev) << " | "
         << (ref ? pm(ref->fc_mae_mean, ref->fc_mae_spread) : "-") << " | "
         << (ref ? ref->source : "-") << " |\n";
      j["rows"][std::to_string(row.n_mid)] = {{"conv", experiment_json(row.conv)},
                                              {"fc", experiment_json(row.fc)}};
    }
  } else if (target == "fig3") {
    auto rows = run_fig3(opts);
    gates = evaluate_fig3_gates(rows);
    md << "# Hierarchical-invariance learning curves (FC S3-inv, n_mid = 8)\n\n";
    md << "| polynomial | final val MAPE | final test MAE | swap(4,5) sensitivity | curve csv |\n";
    md << "|---|---|---|---|---|\n";
    for (const auto& row : rows) {
      const std::string csv = "fig3_" + row.poly + "_curves.csv";
      // one representative curve per polynomial (first seed)
      write_curve_csv(row.result.per_seed.front(), (fs::path(out_dir) / csv).string());
      md << "| " << row.poly << " | " << pm(row.result.val_mape.mean, row.result.val_mape.stdev)
         << " | " << pm(row.result.test_mae.mean, row.result.test_mae.stdev) << " | "
         << detail::fmt3(row.swap45_sensitivity) << " | " << csv << " |\n";
      j["rows"][row.poly] = experiment_json(row.result);
      j["rows"][row.poly]["swap45_sensitivity"] = row.swap45_sensitivity;
    }
  } else {
    throw BadInput("unknown reproduce target '" + target +
                   "' (expected table1|table2|table3|table4|fig3)");
  }

  write_gates_markdown(md, gates);
  bool all_pass = true;
  for (const auto& g : gates) {
    j["checks"][g.name] = {{"pass", g.pass}, {"detail", g.detail}};
    all_pass = all_pass && g.pass;
    std::cout << (g.pass ? "[PASS] " : "[FAIL] ") << g.name << " -- " << g.detail << "\n";
  }
  write_text(fs::path(out_dir) / (target + "_report.md"), md.str());
  std::ofstream json_out(fs::path(out_dir) / (target + "_report.json"));
  json_out << j.dump(2) << "\n";
  std::cout << "wrote " << (fs::path(out_dir) / (target + "_report.md")).string() << "\n";
  return all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// group / invariants
// ---------------------------------------------------------------------------

int cmd_group(const std::string& spec) {
  auto g = parse_group(spec);
  std::cout << "group " << (g.label().empty() ? spec : g.label()) << ": degree " << g.degree()
            << ", order " << g.order() << "\n";
  for (std::size_t k = 0; k < g.order(); ++k)
    std::cout << "  " << k << ": " << g.element(k).cycle_string() << "\n";
  return 0;
}

int cmd_invariants(const std::string& spec, int vars, int max_degree, std::uint64_t cap) {
  auto g = parse_group(spec);
  int degree = max_degree > 0 ? max_degree : static_cast<int>(g.order());
  auto cands = generating_candidates(g, vars, degree, cap);
  std::cout << cands.size() << " generating candidates for " << g.label() << " on " << vars
            << " variables, degree <= " << degree << "\n";
  for (const auto& p : cands) std::cout << "  " << p.to_string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"G-invariant neural network benchmark harness"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a dataset and write .ginvds files");
  std::string gd_task = "poly", gd_poly = "PZ5", gd_counts, gd_out = "data";
  std::uint64_t gd_seed = 444;
  long long gd_mc = 100000;
  bool gd_csv = false;
  gen->add_option("--task", gd_task, "poly | area");
  gen->add_option("--poly", gd_poly, "benchmark polynomial (poly task)");
  gen->add_option("--seed", gd_seed, "generator seed");
  gen->add_option("--counts", gd_counts, "train,val,test item counts");
  gen->add_option("--mc-samples", gd_mc, "Monte-Carlo samples per area target");
  gen->add_option("--out", gd_out, "output directory");
  gen->add_flag("--csv", gd_csv, "also export CSV");

  // train
  auto* train = app.add_subcommand("train", "Run a configured experiment");
  std::string tr_config;
  train->add_option("--config", tr_config, "experiment config file");
  std::string tr_task, tr_poly, tr_arch, tr_group, tr_precision, tr_out, tr_seeds;
  long long tr_nmid = -1, tr_epochs = -1, tr_batch = -1, tr_seed = -1, tr_mc = -1;
  double tr_lr = -1, tr_l2 = -1;
  train->add_option("--task", tr_task, "poly | area");
  train->add_option("--poly", tr_poly, "benchmark polynomial");
  train->add_option("--arch", tr_arch, "fc-ginv|conv-ginv|fc-gavg|conv-gavg|maron");
  train->add_option("--group", tr_group, "group spec (e.g. Z5, D8, S3xS2, gen:(1 2 3 0))");
  train->add_option("--n-mid", tr_nmid, "latent width");
  train->add_option("--epochs", tr_epochs, "training epochs");
  train->add_option("--seeds", tr_seeds, "comma-separated model seeds");
  train->add_option("--seed", tr_seed, "dataset seed");
  train->add_option("--batch", tr_batch, "mini-batch size");
  train->add_option("--lr", tr_lr, "learning rate");
  train->add_option("--l2", tr_l2, "l2 coefficient");
  train->add_option("--precision", tr_precision, "f32 | f64");
  train->add_option("--out", tr_out, "output directory");
  train->add_option("--mc-samples", tr_mc, "Monte-Carlo samples per area target");

  // reproduce
  auto* rep = app.add_subcommand("reproduce", "Run a benchmark reproduction suite");
  std::string rp_target, rp_out = "reports", rp_seeds;
  long long rp_epochs = -1;
  std::uint64_t rp_data_seed = 444;
  rep->add_option("target", rp_target, "table1|table2|table3|table4|fig3")->required();
  rep->add_option("--out", rp_out, "report output directory");
  rep->add_option("--seeds", rp_seeds, "comma-separated model seeds");
  rep->add_option("--epochs", rp_epochs, "override epoch count");
  rep->add_option("--seed", rp_data_seed, "dataset seed");

  // group
  auto* grp = app.add_subcommand("group", "Print a group's canonical element list");
  std::string g_spec;
  grp->add_option("spec", g_spec, "group spec string")->required();

  // invariants
  auto* inv = app.add_subcommand("invariants", "Print symmetrized generating candidates");
  std::string iv_group;
  long long iv_vars = -1, iv_degree = -1, iv_cap = 20000;
  inv->add_option("--group", iv_group, "group spec string")->required();
  inv->add_option("--vars", iv_vars, "variable count (default: group degree)");
  inv->add_option("--max-degree", iv_degree, "degree bound (default: |G|)");
  inv->add_option("--cap", iv_cap, "candidate cap");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed())
      return cmd_gen_data(gd_task, gd_poly, gd_seed, gd_counts, gd_mc, gd_out, gd_csv);

    if (train->parsed()) {
      ExperimentConfig cfg;
      bool has_config = false;
      if (!tr_config.empty()) {
        cfg = load_config(tr_config);
        has_config = true;
      }
      if (!tr_task.empty()) cfg.task = tr_task;
      if (!tr_poly.empty()) cfg.poly = tr_poly;
      if (!tr_arch.empty()) cfg.arch = tr_arch;
      if (!tr_group.empty()) cfg.group = tr_group;
      if (!tr_precision.empty()) cfg.precision = tr_precision;
      if (!tr_out.empty()) cfg.out = tr_out;
      if (!tr_seeds.empty()) cfg.seeds = ginv::detail::parse_seed_list(tr_seeds);
      if (tr_nmid >= 0) cfg.n_mid = static_cast<int>(tr_nmid);
      if (tr_epochs >= 0) cfg.epochs = static_cast<int>(tr_epochs);
      if (tr_batch >= 0) cfg.batch = tr_batch;
      if (tr_seed >= 0) cfg.data_seed = static_cast<std::uint64_t>(tr_seed);
      if (tr_mc >= 0) cfg.mc_samples = tr_mc;
      if (tr_lr >= 0) cfg.lr = tr_lr;
      if (tr_l2 >= 0) cfg.l2 = tr_l2;
      if (!has_config && tr_task.empty() && tr_arch.empty())
        throw BadInput("train requires --config or --task/--arch flags");
      cfg.apply_defaults();
      return cmd_train(cfg);
    }

    if (rep->parsed()) {
      SuiteOptions opts;
      opts.data_seed = rp_data_seed;
      if (!rp_seeds.empty()) opts.seeds = ginv::detail::parse_seed_list(rp_seeds);
      if (rp_epochs >= 0) {
        opts.poly_epochs = static_cast<int>(rp_epochs);
        opts.area_epochs = static_cast<int>(rp_epochs);
      }
      return cmd_reproduce(rp_target, opts, rp_out);
    }

    if (grp->parsed()) return cmd_group(g_spec);

    if (inv->parsed()) {
      auto g = parse_group(iv_group);
      int vars = iv_vars > 0 ? static_cast<int>(iv_vars) : g.degree();
      return cmd_invariants(iv_group, vars, static_cast<int>(iv_degree),
                            static_cast<std::uint64_t>(iv_cap));
    }
  } catch (const BadInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
