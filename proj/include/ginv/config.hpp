#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ginv/dataset.hpp"
#include "ginv/model.hpp"
#include "ginv/train.hpp"

namespace ginv {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Declarative experiment description. Missing values resolve to the
/// published per-task defaults in apply_defaults().
struct ExperimentConfig {
  // [experiment]
  std::string task = "poly";
  std::string arch = "fc-ginv";
  std::string group;  // group spec string; "" resolves per task/polynomial
  std::string poly = "PZ5";
  int n = -1, n_in = -1, n_mid = -1;
  std::string out = "runs/exp";
  // [data]
  std::uint64_t data_seed = 444;
  long long train_count = -1, val_count = -1, test_count = -1;
  long long mc_samples = 100000;
  std::string data_path;  // when set, load .ginvds files instead of generating
  // [train]
  int epochs = -1;
  long long batch = 16;
  double lr = 1e-3;
  double l2 = 1e-5;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::string precision = "f32";

  void apply_defaults() {
    parse_task(task);    // validates
    parse_arch(arch);    // validates
    const bool is_poly = task == "poly";
    if (group.empty()) group = is_poly ? benchmark_group(poly).label() : "Z4";
    if (n < 0) n = is_poly ? 5 : 4;
    if (n_in < 0) n_in = is_poly ? 1 : 2;
    if (n_mid < 0) {
      if (arch == "fc-ginv") n_mid = is_poly ? 64 : 2;
      else if (arch == "conv-ginv") n_mid = is_poly ? 118 : 2;
      else n_mid = 0;
    }
    if (train_count < 0) train_count = is_poly ? 16 : 256;
    if (val_count < 0) val_count = is_poly ? 480 : 256;
    if (test_count < 0) test_count = is_poly ? 4800 : 1024;
    if (epochs < 0) epochs = is_poly ? 2500 : 300;
    if (precision != "f32" && precision != "f64")
      throw ConfigError("precision must be f32 or f64, got '" + precision + "'");
  }

  TrainConfig train_config() const {
    TrainConfig cfg;
    cfg.epochs = epochs;
    cfg.batch_size = static_cast<Index>(batch);
    cfg.lr = lr;
    cfg.l2 = l2;
    cfg.seeds = seeds;
    return cfg;
  }

  Dataset make_dataset() const {
    if (!data_path.empty()) return load_dataset(data_path);
    if (task == "poly")
      return gen_poly_dataset(poly,
                              {static_cast<Index>(train_count), static_cast<Index>(val_count),
                               static_cast<Index>(test_count)},
                              data_seed);
    return gen_area_dataset({static_cast<Index>(train_count), static_cast<Index>(val_count),
                             static_cast<Index>(test_count)},
                            data_seed, static_cast<Index>(mc_samples));
  }
};

namespace detail {

inline std::string seeds_to_string(const std::vector<std::uint64_t>& seeds) {
  std::ostringstream out;
  for (std::size_t i = 0; i < seeds.size(); ++i) out << (i ? "," : "") << seeds[i];
  return out.str();
}

inline std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
  std::vector<std::uint64_t> seeds;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ','))
    if (!tok.empty()) seeds.push_back(std::stoull(tok));
  if (seeds.empty()) throw std::invalid_argument("empty seed list");
  return seeds;
}

}  // namespace detail

/// Flat key=value text with [experiment] / [data] / [train] sections.
/// Unknown sections and keys are rejected with their line number.
inline ExperimentConfig parse_config_text(const std::string& text,
                                          const std::string& filename = "<config>") {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw ConfigError(filename + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    // strip comments and surrounding whitespace
    if (auto hash = line.find('#'); hash != std::string::npos) line = line.substr(0, hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);

    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = line.substr(1, line.size() - 2);
      if (section != "experiment" && section != "data" && section != "train")
        fail("unknown section '" + section + "'");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    auto trim = [](std::string s) {
      auto a = s.find_first_not_of(" \t");
      auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    try {
      if (section == "experiment") {
        if (key == "task") cfg.task = val;
        else if (key == "arch") cfg.arch = val;
        else if (key == "group") cfg.group = val;
        else if (key == "poly") cfg.poly = val;
        else if (key == "n") cfg.n = std::stoi(val);
        else if (key == "n_in") cfg.n_in = std::stoi(val);
        else if (key == "n_mid") cfg.n_mid = std::stoi(val);
        else if (key == "out") cfg.out = val;
        else fail("unknown key '" + key + "' in [experiment]");
      } else if (section == "data") {
        if (key == "seed") cfg.data_seed = std::stoull(val);
        else if (key == "train") cfg.train_count = std::stoll(val);
        else if (key == "val") cfg.val_count = std::stoll(val);
        else if (key == "test") cfg.test_count = std::stoll(val);
        else if (key == "mc_samples") cfg.mc_samples = std::stoll(val);
        else if (key == "path") cfg.data_path = val;
        else fail("unknown key '" + key + "' in [data]");
      } else if (section == "train") {
        if (key == "epochs") cfg.epochs = std::stoi(val);
        else if (key == "batch") cfg.batch = std::stoll(val);
        else if (key == "lr") cfg.lr = std::stod(val);
        else if (key == "l2") cfg.l2 = std::stod(val);
        else if (key == "seeds") cfg.seeds = detail::parse_seed_list(val);
        else if (key == "precision") cfg.precision = val;
        else fail("unknown key '" + key + "' in [train]");
      } else {
        fail("key before any [section]");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      fail("bad value for '" + key + "': " + e.what());
    }
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "[experiment]\n";
  out << "task = " << cfg.task << "\n";
  out << "arch = " << cfg.arch << "\n";
  if (!cfg.group.empty()) out << "group = " << cfg.group << "\n";
  out << "poly = " << cfg.poly << "\n";
  if (cfg.n >= 0) out << "n = " << cfg.n << "\n";
  if (cfg.n_in >= 0) out << "n_in = " << cfg.n_in << "\n";
  if (cfg.n_mid >= 0) out << "n_mid = " << cfg.n_mid << "\n";
  out << "out = " << cfg.out << "\n";
  out << "\n[data]\n";
  out << "seed = " << cfg.data_seed << "\n";
  if (cfg.train_count >= 0) out << "train = " << cfg.train_count << "\n";
  if (cfg.val_count >= 0) out << "val = " << cfg.val_count << "\n";
  if (cfg.test_count >= 0) out << "test = " << cfg.test_count << "\n";
  out << "mc_samples = " << cfg.mc_samples << "\n";
  if (!cfg.data_path.empty()) out << "path = " << cfg.data_path << "\n";
  out << "\n[train]\n";
  if (cfg.epochs >= 0) out << "epochs = " << cfg.epochs << "\n";
  out << "batch = " << cfg.batch << "\n";
  out << "lr = " << cfg.lr << "\n";
  out << "l2 = " << cfg.l2 << "\n";
  out << "seeds = " << detail::seeds_to_string(cfg.seeds) << "\n";
  out << "precision = " << cfg.precision << "\n";
  return out.str();
}

}  // namespace ginv
