#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ginv/checkpoint.hpp"
#include "ginv/polynomial.hpp"
#include "ginv/rng.hpp"
#include "ginv/tensor.hpp"

namespace ginv {

struct Quadrangle {
  std::array<std::array<double, 2>, 4> v;  // counter-clockwise vertex order
};

inline double cross_z(const std::array<double, 2>& a, const std::array<double, 2>& b,
                      const std::array<double, 2>& c) {
  return (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
}

/// Strictly convex with counter-clockwise orientation: every consecutive
/// edge pair turns left.
inline bool is_convex_ccw(const Quadrangle& q) {
  for (int i = 0; i < 4; ++i)
    if (cross_z(q.v[static_cast<std::size_t>(i)], q.v[static_cast<std::size_t>((i + 1) % 4)],
                q.v[static_cast<std::size_t>((i + 2) % 4)]) <= 0.0)
      return false;
  return true;
}

/// Exact polygon area: 0.5 |sum (x_i y_{i+1} - x_{i+1} y_i)|.
inline double shoelace_area(const Quadrangle& q) {
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) {
    const auto& a = q.v[static_cast<std::size_t>(i)];
    const auto& b = q.v[static_cast<std::size_t>((i + 1) % 4)];
    acc += a[0] * b[1] - b[0] * a[1];
  }
  return 0.5 * std::abs(acc);
}

struct QuadrangleGenParams {
  double center_lo = 0.5, center_hi = 1.5;
  double radius_lo = 0.2, radius_hi = 0.5;
  double disturb_lo = -0.1, disturb_hi = 0.1;
  int max_retries = 1000;
};

/// Draws one convex quadrangle: center, four angles in [0, 2pi/4) offset by
/// 2k*pi/4, a shared radius with per-vertex disturbances, coordinates taken
/// by absolute value, rejected and redrawn until convex with all
/// coordinates in [0, 2].
inline Quadrangle gen_quadrangle(Rng& rng, const QuadrangleGenParams& p = {}) {
  constexpr double kTau = 6.283185307179586476925286766559;
  for (int attempt = 0; attempt < p.max_retries; ++attempt) {
    const double cx = rng.uniform(p.center_lo, p.center_hi);
    const double cy = rng.uniform(p.center_lo, p.center_hi);
    std::array<double, 4> angles;
    for (int k = 0; k < 4; ++k)
      angles[static_cast<std::size_t>(k)] = rng.uniform(0.0, kTau / 4.0) + kTau * k / 4.0;
    const double radius = rng.uniform(p.radius_lo, p.radius_hi);
    Quadrangle q;
    bool in_range = true;
    for (int k = 0; k < 4; ++k) {
      const double r = radius + rng.uniform(p.disturb_lo, p.disturb_hi);
      double x = std::abs(cx + r * std::cos(angles[static_cast<std::size_t>(k)]));
      double y = std::abs(cy + r * std::sin(angles[static_cast<std::size_t>(k)]));
      in_range = in_range && x <= 2.0 && y <= 2.0;
      q.v[static_cast<std::size_t>(k)] = {x, y};
    }
    if (in_range && is_convex_ccw(q)) return q;
  }
  throw std::runtime_error("gen_quadrangle: retry limit " + std::to_string(p.max_retries) +
                           " exceeded");
}

/// Monte-Carlo area: fraction of uniform bounding-box samples inside the
/// (convex, CCW) quadrangle, scaled by the box area.
inline double mc_area(const Quadrangle& q, Index samples, Rng& rng) {
  if (samples < 1) throw std::invalid_argument("mc_area: samples must be >= 1");
  double lox = q.v[0][0], hix = q.v[0][0], loy = q.v[0][1], hiy = q.v[0][1];
  for (const auto& v : q.v) {
    lox = std::min(lox, v[0]);
    hix = std::max(hix, v[0]);
    loy = std::min(loy, v[1]);
    hiy = std::max(hiy, v[1]);
  }
  Index inside = 0;
  for (Index s = 0; s < samples; ++s) {
    const std::array<double, 2> pt{rng.uniform(lox, hix), rng.uniform(loy, hiy)};
    bool in = true;
    for (int i = 0; i < 4 && in; ++i) {
      const auto& a = q.v[static_cast<std::size_t>(i)];
      const auto& b = q.v[static_cast<std::size_t>((i + 1) % 4)];
      in = (b[0] - a[0]) * (pt[1] - a[1]) - (b[1] - a[1]) * (pt[0] - a[0]) >= 0.0;
    }
    if (in) ++inside;
  }
  return (hix - lox) * (hiy - loy) * static_cast<double>(inside) / static_cast<double>(samples);
}

struct Split {
  Tensor<double> inputs;    // (count, n, n_in)
  Tensor<double> targets;   // (count)
  Tensor<double> shoelace;  // (count), area task only (empty otherwise)

  Index count() const { return inputs.rank() > 0 ? inputs.dim(0) : 0; }
};

struct Dataset {
  std::string task;  // "poly" | "area"
  std::string poly;  // benchmark polynomial name ("" for area)
  std::uint64_t seed = 0;
  int n = 0, n_in = 0;
  std::uint64_t mc_samples = 0;
  Split train, val, test;

  const Split& split(const std::string& name) const {
    if (name == "train") return train;
    if (name == "val") return val;
    if (name == "test") return test;
    throw std::invalid_argument("unknown split '" + name + "'");
  }
};

/// Uniform samples in [0,1]^5 with targets evaluated exactly; draws run
/// train, then val, then test from a single seeded stream.
inline Dataset gen_poly_dataset(const std::string& poly_name, std::array<Index, 3> counts,
                                std::uint64_t seed) {
  auto p = benchmark_polynomial(poly_name);
  Dataset ds;
  ds.task = "poly";
  ds.poly = poly_name;
  ds.seed = seed;
  ds.n = 5;
  ds.n_in = 1;
  Rng rng(seed);
  auto gen_split = [&](Index count) {
    Split s;
    s.inputs = Tensor<double>({count, 5, 1});
    s.targets = Tensor<double>({count});
    for (Index i = 0; i < count; ++i) {
      for (Index v = 0; v < 5; ++v) s.inputs[i * 5 + v] = rng.uniform();
      s.targets[i] = p.eval(s.inputs.data().data() + i * 5, 5);
    }
    return s;
  };
  ds.train = gen_split(counts[0]);
  ds.val = gen_split(counts[1]);
  ds.test = gen_split(counts[2]);
  return ds;
}

/// Convex quadrangles with Monte-Carlo area targets; the exact shoelace
/// area is stored alongside for oracle checks. Target computed once per
/// quadrangle.
inline Dataset gen_area_dataset(std::array<Index, 3> counts, std::uint64_t seed,
                                Index mc_samples = 100000) {
  Dataset ds;
  ds.task = "area";
  ds.seed = seed;
  ds.n = 4;
  ds.n_in = 2;
  ds.mc_samples = static_cast<std::uint64_t>(mc_samples);
  Rng rng(seed);
  auto gen_split = [&](Index count) {
    Split s;
    s.inputs = Tensor<double>({count, 4, 2});
    s.targets = Tensor<double>({count});
    s.shoelace = Tensor<double>({count});
    for (Index i = 0; i < count; ++i) {
      auto q = gen_quadrangle(rng);
      for (Index k = 0; k < 4; ++k) {
        s.inputs[i * 8 + k * 2 + 0] = q.v[static_cast<std::size_t>(k)][0];
        s.inputs[i * 8 + k * 2 + 1] = q.v[static_cast<std::size_t>(k)][1];
      }
      s.targets[i] = mc_area(q, mc_samples, rng);
      s.shoelace[i] = shoelace_area(q);
    }
    return s;
  };
  ds.train = gen_split(counts[0]);
  ds.val = gen_split(counts[1]);
  ds.test = gen_split(counts[2]);
  return ds;
}

// ---------------------------------------------------------------------------
// .ginvds file format: one text header line, then little-endian float64
// records (per item: n*n_in inputs, target, and for the area task the
// shoelace area).
// ---------------------------------------------------------------------------

inline void save_split(const Dataset& ds, const Split& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "ginvds v1 task=" << ds.task << " poly=" << (ds.poly.empty() ? "-" : ds.poly)
      << " seed=" << ds.seed << " count=" << s.count() << " n=" << ds.n << " n_in=" << ds.n_in
      << " mc_samples=" << ds.mc_samples << " gen=splitmix64\n";
  const Index per_item = static_cast<Index>(ds.n) * ds.n_in;
  for (Index i = 0; i < s.count(); ++i) {
    for (Index k = 0; k < per_item; ++k) ckpt::write_le<double>(out, s.inputs[i * per_item + k]);
    ckpt::write_le<double>(out, s.targets[i]);
    if (ds.task == "area") ckpt::write_le<double>(out, s.shoelace[i]);
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

/// Loads one split; header fields are written into `ds` and must agree with
/// any previously loaded split of the same dataset.
inline Split load_split(Dataset& ds, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("dataset not found: " + path);
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic;
  hs >> magic;
  std::string ver;
  hs >> ver;
  if (magic != "ginvds" || ver != "v1") throw std::runtime_error("bad dataset header in " + path);
  Index count = 0;
  std::string kv;
  std::string task, poly;
  std::uint64_t seed = 0, mc = 0;
  int n = 0, n_in = 0;
  while (hs >> kv) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    auto key = kv.substr(0, eq), val = kv.substr(eq + 1);
    if (key == "task") task = val;
    else if (key == "poly") poly = val == "-" ? "" : val;
    else if (key == "seed") seed = std::stoull(val);
    else if (key == "count") count = static_cast<Index>(std::stoll(val));
    else if (key == "n") n = std::stoi(val);
    else if (key == "n_in") n_in = std::stoi(val);
    else if (key == "mc_samples") mc = std::stoull(val);
  }
  if (task.empty() || n <= 0 || n_in <= 0) throw std::runtime_error("bad dataset header in " + path);
  ds.task = task;
  ds.poly = poly;
  ds.seed = seed;
  ds.n = n;
  ds.n_in = n_in;
  ds.mc_samples = mc;

  Split s;
  const Index per_item = static_cast<Index>(n) * n_in;
  s.inputs = Tensor<double>({count, static_cast<Index>(n), static_cast<Index>(n_in)});
  s.targets = Tensor<double>({count});
  if (task == "area") s.shoelace = Tensor<double>({count});
  for (Index i = 0; i < count; ++i) {
    for (Index k = 0; k < per_item; ++k) s.inputs[i * per_item + k] = ckpt::read_le<double>(in);
    s.targets[i] = ckpt::read_le<double>(in);
    if (task == "area") s.shoelace[i] = ckpt::read_le<double>(in);
  }
  return s;
}

inline void save_dataset(const Dataset& ds, const std::string& prefix) {
  save_split(ds, ds.train, prefix + "_train.ginvds");
  save_split(ds, ds.val, prefix + "_val.ginvds");
  save_split(ds, ds.test, prefix + "_test.ginvds");
}

inline Dataset load_dataset(const std::string& prefix) {
  Dataset ds;
  ds.train = load_split(ds, prefix + "_train.ginvds");
  ds.val = load_split(ds, prefix + "_val.ginvds");
  ds.test = load_split(ds, prefix + "_test.ginvds");
  return ds;
}

/// CSV export: input_0..input_k, target, and shoelace_target for area.
inline void export_csv(const Dataset& ds, const Split& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const Index per_item = static_cast<Index>(ds.n) * ds.n_in;
  for (Index k = 0; k < per_item; ++k) out << "input_" << k << ",";
  out << "target";
  if (ds.task == "area") out << ",shoelace_target";
  out << "\n";
  out.precision(17);
  for (Index i = 0; i < s.count(); ++i) {
    for (Index k = 0; k < per_item; ++k) out << s.inputs[i * per_item + k] << ",";
    out << s.targets[i];
    if (ds.task == "area") out << "," << s.shoelace[i];
    out << "\n";
  }
}

}  // namespace ginv
