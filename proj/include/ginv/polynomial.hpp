#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ginv/permutation.hpp"
#include "ginv/tensor.hpp"

namespace ginv {

/// psi(x) = prod_i x_i^{b_i} with fixed non-negative exponents b_i.
struct Monomial {
  std::vector<int> exponents;

  int degree() const { return std::accumulate(exponents.begin(), exponents.end(), 0); }
  int n_vars() const { return static_cast<int>(exponents.size()); }

  friend bool operator==(const Monomial& a, const Monomial& b) { return a.exponents == b.exponents; }

  /// Graded-lex: compare by total degree, then lexicographically on the
  /// exponent vector with x1 most significant (x1^2 > x1 x2 > x2^2).
  friend bool grlex_less(const Monomial& a, const Monomial& b) {
    int da = a.degree(), db = b.degree();
    if (da != db) return da < db;
    return a.exponents < b.exponents;
  }
};

/// Integer-coefficient polynomial with canonically ordered terms; carries
/// the label of the group it is invariant under.
class InvariantPolynomial {
 public:
  struct Term {
    long long coeff;
    Monomial mono;
  };

  InvariantPolynomial(int n_vars, std::vector<Term> terms, std::string group_label = {})
      : n_vars_(n_vars), terms_(std::move(terms)), group_label_(std::move(group_label)) {
    for (const auto& t : terms_)
      if (t.mono.n_vars() != n_vars_)
        throw std::invalid_argument("polynomial: term variable count mismatch");
    canonicalize();
  }

  int n_vars() const { return n_vars_; }
  const std::vector<Term>& terms() const { return terms_; }
  const std::string& group_label() const { return group_label_; }
  void set_group_label(std::string l) { group_label_ = std::move(l); }

  int degree() const {
    int d = 0;
    for (const auto& t : terms_) d = std::max(d, t.mono.degree());
    return d;
  }

  /// Evaluates in the given scalar precision (coefficients are cast).
  template <typename Scalar>
  Scalar eval(const Scalar* x, Index len) const {
    if (static_cast<int>(len) != n_vars_)
      throw std::invalid_argument("eval_poly: expected " + std::to_string(n_vars_) +
                                  " variables, got " + std::to_string(len));
    Scalar acc = 0;
    for (const auto& t : terms_) {
      Scalar m = static_cast<Scalar>(t.coeff);
      for (int v = 0; v < n_vars_; ++v)
        for (int e = 0; e < t.mono.exponents[static_cast<std::size_t>(v)]; ++e) m *= x[v];
      acc += m;
    }
    return acc;
  }

  template <typename Scalar>
  Scalar eval(const std::vector<Scalar>& x) const {
    return eval(x.data(), static_cast<Index>(x.size()));
  }

  /// Accumulates weight * d(poly)/dx_v into grad[v] for every variable.
  template <typename Scalar>
  void accumulate_grad(const Scalar* x, Scalar weight, Scalar* grad) const {
    for (const auto& t : terms_)
      for (int v = 0; v < n_vars_; ++v) {
        int bv = t.mono.exponents[static_cast<std::size_t>(v)];
        if (bv == 0) continue;
        Scalar m = static_cast<Scalar>(t.coeff) * static_cast<Scalar>(bv);
        for (int e = 0; e < bv - 1; ++e) m *= x[v];
        for (int u = 0; u < n_vars_; ++u) {
          if (u == v) continue;
          for (int e = 0; e < t.mono.exponents[static_cast<std::size_t>(u)]; ++e) m *= x[u];
        }
        grad[v] += weight * m;
      }
  }

  /// Substitutes variables by the permutation: x_i -> x_{sigma(i)}.
  InvariantPolynomial permuted(const Permutation& p) const {
    if (p.degree() != n_vars_) throw std::invalid_argument("permuted: degree mismatch");
    std::vector<Term> out;
    out.reserve(terms_.size());
    for (const auto& t : terms_) {
      Monomial m;
      m.exponents.assign(static_cast<std::size_t>(n_vars_), 0);
      for (int v = 0; v < n_vars_; ++v)
        m.exponents[static_cast<std::size_t>(p(v))] = t.mono.exponents[static_cast<std::size_t>(v)];
      out.push_back({t.coeff, std::move(m)});
    }
    return InvariantPolynomial(n_vars_, std::move(out), group_label_);
  }

  /// Divides every coefficient by the leading (graded-lex greatest term)
  /// coefficient; requires exact divisibility.
  InvariantPolynomial normalized_leading() const {
    if (terms_.empty()) return *this;
    long long lead = terms_.front().coeff;
    std::vector<Term> out = terms_;
    for (auto& t : out) {
      if (t.coeff % lead != 0)
        throw std::runtime_error("normalize: leading coefficient does not divide all terms");
      t.coeff /= lead;
    }
    return InvariantPolynomial(n_vars_, std::move(out), group_label_);
  }

  friend bool operator==(const InvariantPolynomial& a, const InvariantPolynomial& b) {
    if (a.n_vars_ != b.n_vars_ || a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t i = 0; i < a.terms_.size(); ++i)
      if (a.terms_[i].coeff != b.terms_[i].coeff || !(a.terms_[i].mono == b.terms_[i].mono))
        return false;
    return true;
  }

  /// "c*x1^a1*...*xn^an + ..." with unit factors elided, graded-lex
  /// descending term order (leading term first).
  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream out;
    bool first = true;
    for (const auto& t : terms_) {
      if (!first) out << (t.coeff < 0 ? " - " : " + ");
      else if (t.coeff < 0) out << "-";
      first = false;
      long long c = t.coeff < 0 ? -t.coeff : t.coeff;
      bool printed = false;
      if (c != 1 || t.mono.degree() == 0) {
        out << c;
        printed = true;
      }
      for (int v = 0; v < n_vars_; ++v) {
        int e = t.mono.exponents[static_cast<std::size_t>(v)];
        if (e == 0) continue;
        if (printed) out << "*";
        out << "x" << (v + 1);
        if (e > 1) out << "^" << e;
        printed = true;
      }
    }
    return out.str();
  }

 private:
  void canonicalize() {
    std::map<std::vector<int>, long long> merged;
    for (auto& t : terms_) merged[t.mono.exponents] += t.coeff;
    std::vector<Term> out;
    for (auto& [exps, c] : merged)
      if (c != 0) out.push_back({c, Monomial{exps}});
    // leading (graded-lex greatest) term first
    std::sort(out.begin(), out.end(),
              [](const Term& a, const Term& b) { return grlex_less(b.mono, a.mono); });
    terms_ = std::move(out);
  }

  int n_vars_;
  std::vector<Term> terms_;
  std::string group_label_;
};

/// All monomials with 1 <= degree <= max_degree over n_vars variables in
/// graded-lex order; count = C(n_vars + max_degree, max_degree) - 1.
inline std::vector<Monomial> enumerate_monomials(int n_vars, int max_degree) {
  if (n_vars < 1 || max_degree < 1)
    throw std::invalid_argument("enumerate_monomials: n_vars and max_degree must be >= 1");
  std::vector<Monomial> out;
  std::vector<int> exps(static_cast<std::size_t>(n_vars), 0);
  // enumerate compositions of each degree in descending lex order
  auto rec = [&](auto&& self, int var, int remaining) -> void {
    if (var == n_vars - 1) {
      exps[static_cast<std::size_t>(var)] = remaining;
      out.push_back(Monomial{exps});
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      exps[static_cast<std::size_t>(var)] = e;
      self(self, var + 1, remaining - e);
    }
  };
  for (int d = 1; d <= max_degree; ++d) rec(rec, 0, d);
  return out;
}

inline std::uint64_t monomial_count(int n_vars, int max_degree) {
  // C(n_vars + max_degree, max_degree) - 1
  std::uint64_t num = 1;
  for (int i = 1; i <= n_vars; ++i) {
    num = num * static_cast<std::uint64_t>(max_degree + i) / static_cast<std::uint64_t>(i);
  }
  return num - 1;
}

/// Orbit sum sum_{g in G} psi(g(x)) with like terms merged.
inline InvariantPolynomial reynolds_symmetrize(const Monomial& m, const PermutationGroup& G) {
  if (m.n_vars() != G.degree())
    throw std::invalid_argument("reynolds_symmetrize: variable count does not match group degree");
  std::vector<InvariantPolynomial::Term> terms;
  terms.reserve(G.order());
  for (const auto& g : G.elements()) {
    Monomial img;
    img.exponents.assign(m.exponents.size(), 0);
    for (int v = 0; v < m.n_vars(); ++v)
      img.exponents[static_cast<std::size_t>(g(v))] = m.exponents[static_cast<std::size_t>(v)];
    terms.push_back({1, std::move(img)});
  }
  return InvariantPolynomial(m.n_vars(), std::move(terms), G.label());
}

/// Symmetrizes every monomial of degree <= max_degree (default: the Noether
/// bound |G|), deduplicates polynomials equal up to a scalar factor and
/// scales each survivor so its leading coefficient is 1.
inline std::vector<InvariantPolynomial> generating_candidates(const PermutationGroup& G, int n_vars,
                                                              int max_degree = -1,
                                                              std::uint64_t cap = 20000) {
  if (n_vars != G.degree())
    throw std::invalid_argument("generating_candidates: n_vars must equal group degree");
  if (max_degree < 0) max_degree = static_cast<int>(G.order());
  const std::uint64_t count = monomial_count(n_vars, max_degree);
  if (count > cap)
    throw std::runtime_error("generating_candidates: " + std::to_string(count) +
                             " candidate monomials exceed cap " + std::to_string(cap));
  std::vector<InvariantPolynomial> out;
  std::set<std::string> seen;  // canonical string of the normalized polynomial
  for (const auto& m : enumerate_monomials(n_vars, max_degree)) {
    auto p = reynolds_symmetrize(m, G).normalized_leading();
    auto key = p.to_string();
    if (seen.insert(std::move(key)).second) out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// benchmark polynomials
// ---------------------------------------------------------------------------

namespace detail {

inline Monomial mono5(int a1, int a2, int a3, int a4, int a5) {
  return Monomial{{a1, a2, a3, a4, a5}};
}

}  // namespace detail

/// The invariance group each benchmark polynomial is built for, as a
/// degree-5 permutation group (smaller groups extended by fixed points).
inline PermutationGroup benchmark_group(const std::string& name) {
  using PG = PermutationGroup;
  if (name == "PZ5") return PG::cyclic(5);
  if (name == "PZ3") return PG::direct_product(PG::cyclic(3), PG::trivial(2));
  if (name == "PS3") return PG::direct_product(PG::symmetric(3), PG::trivial(2));
  if (name == "PS3xS2") return PG::direct_product(PG::symmetric(3), PG::symmetric(2));
  if (name == "PD8") return PG::direct_product(PG::dihedral(4), PG::trivial(1));
  if (name == "PA4") return PG::direct_product(PG::alternating(4), PG::trivial(1));
  if (name == "PS4") return PG::direct_product(PG::symmetric(4), PG::trivial(1));
  throw std::invalid_argument("unknown benchmark polynomial '" + name + "'");
}

/// The seven benchmark target polynomials on 5 variables.
inline InvariantPolynomial benchmark_polynomial(const std::string& name) {
  using detail::mono5;
  using Term = InvariantPolynomial::Term;
  std::vector<Term> terms;
  if (name == "PZ5") {
    terms = {{1, mono5(1, 2, 0, 0, 0)}, {1, mono5(0, 1, 2, 0, 0)}, {1, mono5(0, 0, 1, 2, 0)},
             {1, mono5(0, 0, 0, 1, 2)}, {1, mono5(2, 0, 0, 0, 1)}};
  } else if (name == "PZ3") {
    terms = {{1, mono5(1, 2, 0, 0, 0)},
             {1, mono5(0, 1, 2, 0, 0)},
             {1, mono5(2, 0, 1, 0, 0)},
             {2, mono5(0, 0, 0, 1, 0)},
             {1, mono5(0, 0, 0, 0, 1)}};
  } else if (name == "PS3") {
    terms = {{1, mono5(1, 1, 1, 0, 0)}, {2, mono5(0, 0, 0, 1, 0)}, {1, mono5(0, 0, 0, 0, 1)}};
  } else if (name == "PS3xS2") {
    terms = {{1, mono5(1, 1, 1, 0, 0)}, {1, mono5(0, 0, 0, 1, 0)}, {1, mono5(0, 0, 0, 0, 1)}};
  } else if (name == "PD8") {
    terms = {{1, mono5(2, 1, 0, 0, 0)}, {1, mono5(0, 2, 1, 0, 0)}, {1, mono5(0, 0, 2, 1, 0)},
             {1, mono5(1, 0, 0, 2, 0)}, {1, mono5(1, 2, 0, 0, 0)}, {1, mono5(0, 1, 2, 0, 0)},
             {1, mono5(0, 0, 1, 2, 0)}, {1, mono5(2, 0, 0, 1, 0)}, {1, mono5(0, 0, 0, 0, 1)}};
  } else if (name == "PA4") {
    terms = {{1, mono5(1, 1, 0, 0, 0)}, {1, mono5(0, 0, 1, 1, 0)}, {1, mono5(1, 0, 1, 0, 0)},
             {1, mono5(0, 1, 0, 1, 0)}, {1, mono5(1, 0, 0, 1, 0)}, {1, mono5(0, 1, 1, 0, 0)},
             {1, mono5(1, 1, 1, 0, 0)}, {1, mono5(1, 1, 0, 1, 0)}, {1, mono5(1, 0, 1, 1, 0)},
             {1, mono5(0, 1, 1, 1, 0)}, {1, mono5(0, 0, 0, 0, 1)}};
  } else if (name == "PS4") {
    terms = {{1, mono5(1, 1, 1, 1, 0)}, {1, mono5(0, 0, 0, 0, 1)}};
  } else {
    throw std::invalid_argument("unknown benchmark polynomial '" + name + "'");
  }
  return InvariantPolynomial(5, std::move(terms), benchmark_group(name).label());
}

inline const std::vector<std::string>& benchmark_polynomial_names() {
  static const std::vector<std::string> names = {"PZ5", "PZ3", "PS3", "PS3xS2", "PD8", "PA4", "PS4"};
  return names;
}

/// eval_poly in the spec's free-function form.
template <typename Scalar>
Scalar eval_poly(const InvariantPolynomial& p, const std::vector<Scalar>& x) {
  return p.eval(x);
}

}  // namespace ginv
