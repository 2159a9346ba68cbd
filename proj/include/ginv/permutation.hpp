#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ginv {

/// Index map on {0, ..., n-1}; mapping[i] = sigma(i).
class Permutation {
 public:
  explicit Permutation(std::vector<int> mapping) : map_(std::move(mapping)) {
    std::vector<bool> seen(map_.size(), false);
    for (int v : map_) {
      if (v < 0 || v >= static_cast<int>(map_.size()) || seen[v])
        throw std::invalid_argument("permutation: mapping is not a bijection");
      seen[v] = true;
    }
  }

  static Permutation identity(int degree) {
    std::vector<int> m(static_cast<std::size_t>(degree));
    std::iota(m.begin(), m.end(), 0);
    return Permutation(std::move(m));
  }

  /// Builds from disjoint cycles over 0-based indices; entries not named in
  /// any cycle are fixed. degree must cover every named index.
  static Permutation from_cycles(const std::vector<std::vector<int>>& cycles, int degree) {
    std::vector<int> m(static_cast<std::size_t>(degree));
    std::iota(m.begin(), m.end(), 0);
    for (const auto& c : cycles) {
      for (std::size_t k = 0; k < c.size(); ++k) {
        int from = c[k];
        int to = c[(k + 1) % c.size()];
        if (from < 0 || from >= degree || to < 0)
          throw std::invalid_argument("permutation: cycle index out of range");
        m[static_cast<std::size_t>(from)] = to;
      }
    }
    return Permutation(std::move(m));
  }

  int degree() const { return static_cast<int>(map_.size()); }
  int operator()(int i) const { return map_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& mapping() const { return map_; }

  bool is_identity() const {
    for (int i = 0; i < degree(); ++i)
      if ((*this)(i) != i) return false;
    return true;
  }

  /// Disjoint-cycle string, fixed points omitted; "()" for the identity.
  std::string cycle_string(int index_base = 0) const {
    std::ostringstream out;
    std::vector<bool> done(map_.size(), false);
    bool any = false;
    for (int start = 0; start < degree(); ++start) {
      if (done[static_cast<std::size_t>(start)] || (*this)(start) == start) continue;
      out << '(';
      int i = start;
      bool first = true;
      while (!done[static_cast<std::size_t>(i)]) {
        done[static_cast<std::size_t>(i)] = true;
        if (!first) out << ' ';
        out << (i + index_base);
        first = false;
        i = (*this)(i);
      }
      out << ')';
      any = true;
    }
    return any ? out.str() : std::string("()");
  }

  friend bool operator==(const Permutation& a, const Permutation& b) { return a.map_ == b.map_; }
  friend bool operator!=(const Permutation& a, const Permutation& b) { return !(a == b); }
  friend bool operator<(const Permutation& a, const Permutation& b) { return a.map_ < b.map_; }

 private:
  std::vector<int> map_;
};

/// Apply q first, then p: result(i) = p(q(i)).
inline Permutation compose(const Permutation& p, const Permutation& q) {
  if (p.degree() != q.degree()) throw std::invalid_argument("compose: degree mismatch");
  std::vector<int> m(static_cast<std::size_t>(p.degree()));
  for (int i = 0; i < p.degree(); ++i) m[static_cast<std::size_t>(i)] = p(q(i));
  return Permutation(std::move(m));
}

inline Permutation inverse(const Permutation& p) {
  std::vector<int> m(static_cast<std::size_t>(p.degree()));
  for (int i = 0; i < p.degree(); ++i) m[static_cast<std::size_t>(p(i))] = i;
  return Permutation(std::move(m));
}

/// +1 for even permutations, -1 for odd ones.
inline int parity(const Permutation& p) {
  std::vector<bool> done(static_cast<std::size_t>(p.degree()), false);
  int sign = 1;
  for (int start = 0; start < p.degree(); ++start) {
    if (done[static_cast<std::size_t>(start)]) continue;
    int len = 0;
    int i = start;
    while (!done[static_cast<std::size_t>(i)]) {
      done[static_cast<std::size_t>(i)] = true;
      i = p(i);
      ++len;
    }
    if (len % 2 == 0) sign = -sign;
  }
  return sign;
}

/// Finite G <= S_n stored as an explicit, canonically ordered element list.
/// Canonical order: breadth-first closure order over right-multiplication by
/// the generators, lexicographic on the mapping within each BFS level, with
/// the identity first. The order is a pure function of the generator list.
class PermutationGroup {
 public:
  static constexpr std::size_t kDefaultMaxOrder = 50000;

  static PermutationGroup closure(std::vector<Permutation> generators, int degree = -1,
                                  std::size_t max_order = kDefaultMaxOrder,
                                  std::string label = {}) {
    if (degree < 0) {
      if (generators.empty())
        throw std::invalid_argument("closure: degree required with an empty generator list");
      degree = generators.front().degree();
    }
    for (const auto& g : generators)
      if (g.degree() != degree) throw std::invalid_argument("closure: generator degree mismatch");

    std::vector<Permutation> elements{Permutation::identity(degree)};
    std::set<std::vector<int>> seen{elements.front().mapping()};
    std::vector<Permutation> frontier = elements;
    while (!frontier.empty()) {
      std::set<std::vector<int>> level;  // lex order within the BFS level
      for (const auto& e : frontier)
        for (const auto& g : generators) {
          auto c = compose(e, g);
          if (!seen.count(c.mapping())) level.insert(c.mapping());
        }
      frontier.clear();
      for (const auto& m : level) {
        seen.insert(m);
        frontier.emplace_back(m);
        elements.push_back(frontier.back());
        if (elements.size() > max_order)
          throw std::runtime_error("group too large: closure exceeded max_order " +
                                   std::to_string(max_order));
      }
    }
    return PermutationGroup(degree, std::move(elements), std::move(generators), std::move(label));
  }

  static PermutationGroup trivial(int degree) {
    return PermutationGroup(degree, {Permutation::identity(degree)}, {}, "T" + std::to_string(degree));
  }

  static PermutationGroup cyclic(int n) {
    if (n < 1) throw std::invalid_argument("cyclic: n >= 1 required");
    std::vector<Permutation> gens;
    if (n >= 2) gens.push_back(rotation(n));
    auto g = closure(std::move(gens), n);
    g.label_ = "Z" + std::to_string(n);
    return g;
  }

  /// Dihedral group on n points (order 2n for n >= 3), generated by the
  /// n-cycle and the reflection i -> n-1-i.
  static PermutationGroup dihedral(int n) {
    if (n < 1) throw std::invalid_argument("dihedral: n >= 1 required");
    std::vector<Permutation> gens;
    if (n >= 2) {
      gens.push_back(rotation(n));
      std::vector<int> refl(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) refl[static_cast<std::size_t>(i)] = n - 1 - i;
      gens.emplace_back(std::move(refl));
    }
    auto g = closure(std::move(gens), n);
    g.label_ = "D" + std::to_string(2 * n);
    return g;
  }

  static PermutationGroup symmetric(int n) {
    if (n < 1) throw std::invalid_argument("symmetric: n >= 1 required");
    std::vector<Permutation> gens;
    if (n >= 2) {
      std::vector<int> swap01(static_cast<std::size_t>(n));
      std::iota(swap01.begin(), swap01.end(), 0);
      std::swap(swap01[0], swap01[1]);
      gens.emplace_back(std::move(swap01));
      if (n >= 3) gens.push_back(rotation(n));
    }
    auto g = closure(std::move(gens), n);
    g.label_ = "S" + std::to_string(n);
    return g;
  }

  static PermutationGroup alternating(int n) {
    if (n < 1) throw std::invalid_argument("alternating: n >= 1 required");
    std::vector<Permutation> gens;
    for (int k = 2; k < n; ++k) gens.push_back(Permutation::from_cycles({{0, 1, k}}, n));
    auto g = closure(std::move(gens), n);
    g.label_ = "A" + std::to_string(n);
    return g;
  }

  /// a acts on indices {0..a.degree-1}, b on the remaining block.
  static PermutationGroup direct_product(const PermutationGroup& a, const PermutationGroup& b) {
    int degree = a.degree() + b.degree();
    std::vector<Permutation> gens;
    for (const auto& g : a.generators()) {
      std::vector<int> m(static_cast<std::size_t>(degree));
      std::iota(m.begin(), m.end(), 0);
      for (int i = 0; i < a.degree(); ++i) m[static_cast<std::size_t>(i)] = g(i);
      gens.emplace_back(std::move(m));
    }
    for (const auto& g : b.generators()) {
      std::vector<int> m(static_cast<std::size_t>(degree));
      std::iota(m.begin(), m.end(), 0);
      for (int i = 0; i < b.degree(); ++i)
        m[static_cast<std::size_t>(a.degree() + i)] = a.degree() + g(i);
      gens.emplace_back(std::move(m));
    }
    auto g = closure(std::move(gens), degree, kDefaultMaxOrder);
    g.label_ = a.label() + "x" + b.label();
    return g;
  }

  int degree() const { return degree_; }
  std::size_t order() const { return elements_.size(); }
  const std::vector<Permutation>& elements() const { return elements_; }
  const Permutation& element(std::size_t k) const { return elements_[k]; }
  const std::vector<Permutation>& generators() const { return generators_; }
  const std::string& label() const { return label_; }
  void set_label(std::string label) { label_ = std::move(label); }

  bool contains(const Permutation& p) const {
    for (const auto& e : elements_)
      if (e == p) return true;
    return false;
  }

  bool contains_subgroup(const PermutationGroup& sub) const {
    for (const auto& e : sub.elements())
      if (!contains(e)) return false;
    return true;
  }

  /// Induced action on row-major (degree x columns) flat indices: row i,
  /// column c maps to (sigma(i), c). Element order is inherited.
  PermutationGroup expanded(int columns) const {
    if (columns < 1) throw std::invalid_argument("expanded: columns >= 1 required");
    auto lift = [&](const Permutation& p) {
      std::vector<int> m(static_cast<std::size_t>(degree_ * columns));
      for (int i = 0; i < degree_; ++i)
        for (int c = 0; c < columns; ++c)
          m[static_cast<std::size_t>(i * columns + c)] = p(i) * columns + c;
      return Permutation(std::move(m));
    };
    std::vector<Permutation> elems, gens;
    elems.reserve(elements_.size());
    for (const auto& e : elements_) elems.push_back(lift(e));
    for (const auto& g : generators_) gens.push_back(lift(g));
    return PermutationGroup(degree_ * columns, std::move(elems), std::move(gens), label_);
  }

 private:
  PermutationGroup(int degree, std::vector<Permutation> elements, std::vector<Permutation> generators,
                   std::string label)
      : degree_(degree),
        elements_(std::move(elements)),
        generators_(std::move(generators)),
        label_(std::move(label)) {}

  static Permutation rotation(int n) {
    std::vector<int> m(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) m[static_cast<std::size_t>(i)] = (i + 1) % n;
    return Permutation(std::move(m));
  }

  int degree_;
  std::vector<Permutation> elements_;
  std::vector<Permutation> generators_;
  std::string label_;
};

namespace detail {

inline std::vector<std::vector<int>> parse_cycles(const std::string& text) {
  std::vector<std::vector<int>> cycles;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[pos]))) {
      ++pos;
      continue;
    }
    if (text[pos] != '(') throw std::invalid_argument("group spec: expected '(' in cycle list");
    std::size_t close = text.find(')', pos);
    if (close == std::string::npos) throw std::invalid_argument("group spec: unbalanced '('");
    std::vector<int> cycle;
    std::istringstream in(text.substr(pos + 1, close - pos - 1));
    std::string tok;
    while (std::getline(in, tok, ' ')) {
      if (tok.empty()) continue;
      // allow comma separators too
      std::istringstream sub(tok);
      std::string t2;
      while (std::getline(sub, t2, ',')) {
        if (t2.empty()) continue;
        cycle.push_back(std::stoi(t2));
      }
    }
    if (!cycle.empty()) cycles.push_back(std::move(cycle));
    pos = close + 1;
  }
  return cycles;
}

}  // namespace detail

/// Group spec grammar: "Z5", "D8", "S4", "A4", "T2" and 'x'-joined products
/// ("S3xS2"), or "gen:(...)(...)[;(...)...][@degree]" for explicit
/// generators. Generator cycles with any 0 entry are read 0-based, otherwise
/// 1-based; generators are separated by ';', cycles within one generator
/// compose as usual.
inline PermutationGroup parse_group(const std::string& spec,
                                    std::size_t max_order = PermutationGroup::kDefaultMaxOrder) {
  if (spec.empty()) throw std::invalid_argument("group spec: empty string");
  if (spec.rfind("gen:", 0) == 0) {
    std::string body = spec.substr(4);
    int forced_degree = -1;
    if (auto at = body.find('@'); at != std::string::npos) {
      forced_degree = std::stoi(body.substr(at + 1));
      body = body.substr(0, at);
    }
    std::vector<std::string> parts;
    std::istringstream in(body);
    std::string part;
    while (std::getline(in, part, ';'))
      if (!part.empty()) parts.push_back(part);
    if (parts.empty()) throw std::invalid_argument("group spec: no generators in gen: form");

    std::vector<std::vector<std::vector<int>>> all_cycles;
    bool has_zero = false;
    int max_index = -1;
    for (const auto& p : parts) {
      auto cycles = detail::parse_cycles(p);
      for (const auto& c : cycles)
        for (int v : c) {
          has_zero = has_zero || v == 0;
          max_index = std::max(max_index, v);
        }
      all_cycles.push_back(std::move(cycles));
    }
    int base = has_zero ? 0 : 1;
    int degree = forced_degree > 0 ? forced_degree : max_index + 1 - base;
    if (degree < 1) throw std::invalid_argument("group spec: cannot infer degree");
    std::vector<Permutation> gens;
    for (auto& cycles : all_cycles) {
      for (auto& c : cycles)
        for (int& v : c) {
          v -= base;
          if (v < 0 || v >= degree) throw std::invalid_argument("group spec: cycle index out of range");
        }
      gens.push_back(Permutation::from_cycles(cycles, degree));
    }
    return PermutationGroup::closure(std::move(gens), degree, max_order, spec);
  }

  // 'x'-joined named factors
  std::vector<std::string> tokens;
  std::string tok;
  for (char ch : spec) {
    if (ch == 'x' || ch == 'X') {
      tokens.push_back(tok);
      tok.clear();
    } else {
      tok.push_back(ch);
    }
  }
  tokens.push_back(tok);

  auto named = [&](const std::string& t) -> PermutationGroup {
    if (t.size() < 2) throw std::invalid_argument("group spec: unknown token '" + t + "'");
    int num = 0;
    try {
      num = std::stoi(t.substr(1));
    } catch (const std::exception&) {
      throw std::invalid_argument("group spec: unknown token '" + t + "'");
    }
    switch (t[0]) {
      case 'Z':
      case 'z':
        return PermutationGroup::cyclic(num);
      case 'D':
      case 'd':
        if (num % 2 != 0) throw std::invalid_argument("group spec: dihedral order must be even: " + t);
        return PermutationGroup::dihedral(num / 2);
      case 'S':
      case 's':
        return PermutationGroup::symmetric(num);
      case 'A':
      case 'a':
        return PermutationGroup::alternating(num);
      case 'T':
      case 't':
        return PermutationGroup::trivial(num);
      default:
        throw std::invalid_argument("group spec: unknown token '" + t + "'");
    }
  };

  PermutationGroup g = named(tokens.front());
  for (std::size_t k = 1; k < tokens.size(); ++k)
    g = PermutationGroup::direct_product(g, named(tokens[k]));
  return g;
}

}  // namespace ginv
