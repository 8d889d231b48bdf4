#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "biqrank/errors.hpp"
#include "biqrank/graphs.hpp"

namespace biqrank {

// Coefficient tensor position (i, j, k, l), 1-based: the coefficient of
// x_i y_j x_k y_l. The tensor obeys a(i,j,k,l) = a(k,j,i,l) = a(k,l,i,j)
// = a(i,l,k,j); positions related by those swaps form an orbit, stored
// once under the lexicographically smallest member.
using TensorIndex = std::array<int, 4>;

inline TensorIndex orbit_representative(int i, int j, int k, int l) {
  const std::array<TensorIndex, 4> orbit{
      TensorIndex{i, j, k, l}, TensorIndex{k, j, i, l},
      TensorIndex{k, l, i, j}, TensorIndex{i, l, k, j}};
  return *std::min_element(orbit.begin(), orbit.end());
}

// Number of distinct tensor positions in the orbit: 4 when i != k and
// j != l, 1 on the diagonal x_i^2 y_j^2, 2 otherwise.
inline int orbit_size(const TensorIndex& t) {
  std::array<TensorIndex, 4> orbit{
      TensorIndex{t[0], t[1], t[2], t[3]}, TensorIndex{t[2], t[1], t[0], t[3]},
      TensorIndex{t[2], t[3], t[0], t[1]}, TensorIndex{t[0], t[3], t[2], t[1]}};
  std::sort(orbit.begin(), orbit.end());
  return static_cast<int>(std::unique(orbit.begin(), orbit.end()) -
                          orbit.begin());
}

struct FormEntry {
  int i, j, k, l;
  double value;
};

// Real biquadratic form P(x, y) = sum a(i,j,k,l) x_i y_j x_k y_l on
// R^m x R^n, quadratic in x for fixed y and vice versa. Coefficients are
// stored per orbit; entries that sum to exactly zero are dropped.
class BiquadraticForm {
 public:
  static BiquadraticForm make(int m, int n,
                              const std::vector<FormEntry>& entries) {
    if (m < 1 || n < 1)
      throw InvalidIndex("BiquadraticForm: sides must be positive");
    BiquadraticForm p;
    p.m_ = m;
    p.n_ = n;
    for (const FormEntry& e : entries) {
      if (e.i < 1 || e.i > m || e.k < 1 || e.k > m || e.j < 1 || e.j > n ||
          e.l < 1 || e.l > n)
        throw InvalidIndex("BiquadraticForm: tensor index out of range");
      if (!std::isfinite(e.value))
        throw InvalidMatrix("BiquadraticForm: non-finite coefficient");
      p.coeffs_[orbit_representative(e.i, e.j, e.k, e.l)] += e.value;
    }
    std::erase_if(p.coeffs_, [](const auto& kv) { return kv.second == 0.0; });
    return p;
  }

  int m() const { return m_; }
  int n() const { return n_; }
  bool is_zero() const { return coeffs_.empty(); }

  // Canonical orbit representative -> tensor coefficient.
  const std::map<TensorIndex, double>& coefficients() const { return coeffs_; }

  double coefficient(int i, int j, int k, int l) const {
    check_range(i, j, k, l);
    auto it = coeffs_.find(orbit_representative(i, j, k, l));
    return it == coeffs_.end() ? 0.0 : it->second;
  }

  // Coefficient of the monomial x_i x_k y_j y_l (i <= k, j <= l), i.e. the
  // orbit coefficient times the orbit size.
  double monomial_coeff(int i, int k, int j, int l) const {
    if (i > k || j > l)
      throw InvalidIndex("monomial_coeff: requires i <= k and j <= l");
    check_range(i, j, k, l);
    const TensorIndex rep = orbit_representative(i, j, k, l);
    auto it = coeffs_.find(rep);
    return it == coeffs_.end() ? 0.0 : it->second * orbit_size(rep);
  }

  double evaluate(const std::vector<double>& x,
                  const std::vector<double>& y) const {
    if (static_cast<int>(x.size()) != m_ || static_cast<int>(y.size()) != n_)
      throw DimensionMismatch("evaluate: vector sizes do not match the form");
    double total = 0.0;
    for (const auto& [t, a] : coeffs_) {
      // All orbit members share the monomial x_i x_k y_j y_l.
      total += a * orbit_size(t) * x[t[0] - 1] * x[t[2] - 1] * y[t[1] - 1] *
               y[t[3] - 1];
    }
    return total;
  }

 private:
  BiquadraticForm() = default;
  void check_range(int i, int j, int k, int l) const {
    if (i < 1 || i > m_ || k < 1 || k > m_ || j < 1 || j > n_ || l < 1 ||
        l > n_)
      throw InvalidIndex("BiquadraticForm: tensor index out of range");
  }

  int m_ = 0;
  int n_ = 0;
  std::map<TensorIndex, double> coeffs_;
};

inline BiquadraticForm make_form(int m, int n,
                                 const std::vector<FormEntry>& entries) {
  return BiquadraticForm::make(m, n, entries);
}

// P_G(x, y) = sum over edges (i, j) of x_i^2 y_j^2.
inline BiquadraticForm simple_form_from_graph(const BipartiteGraph& g) {
  std::vector<FormEntry> entries;
  entries.reserve(g.edges.size());
  for (const auto& [i, j] : g.edges) entries.push_back({i, j, i, j, 1.0});
  return make_form(g.m, g.n, entries);
}

// True when the form is a sum of distinct squares x_i^2 y_j^2 with unit
// coefficients, i.e. P_G for some bipartite graph G.
inline bool is_simple_form(const BiquadraticForm& p) {
  for (const auto& [t, a] : p.coefficients())
    if (t[0] != t[2] || t[1] != t[3] || a != 1.0) return false;
  return true;
}

// Recovers G from P_G; the support of the squares gives the edges.
inline BipartiteGraph graph_from_simple_form(const BiquadraticForm& p) {
  if (!is_simple_form(p))
    throw NotSimpleForm("graph_from_simple_form: coefficients are not 0/1 squares");
  std::vector<std::pair<int, int>> edges;
  for (const auto& [t, a] : p.coefficients()) edges.emplace_back(t[0], t[1]);
  return make_graph(p.m(), p.n(), edges);
}

enum class ChoiVariant {
  kClassical,  // squares plus -2 cross terms; PSD but not SOS
  kPrinted,    // squares only, three with negative sign; takes value -1
};

// The 3 x 3 Choi biquadratic form in two variants.
inline BiquadraticForm choi_form(ChoiVariant variant) {
  std::vector<FormEntry> entries;
  if (variant == ChoiVariant::kClassical) {
    entries = {
        {1, 1, 1, 1, 1.0},  {2, 2, 2, 2, 1.0},  {3, 3, 3, 3, 1.0},
        {1, 2, 1, 2, 1.0},  {2, 3, 2, 3, 1.0},  {3, 1, 3, 1, 1.0},
        // Cross monomials -2 x_1 x_2 y_1 y_2 etc.: orbit size 4, so the
        // tensor coefficient is -1/2.
        {1, 1, 2, 2, -0.5}, {2, 2, 3, 3, -0.5}, {1, 1, 3, 3, -0.5},
    };
  } else {
    entries = {
        {1, 1, 1, 1, 1.0}, {2, 2, 2, 2, 1.0}, {3, 3, 3, 3, 1.0},
        {1, 2, 1, 2, 1.0}, {2, 3, 2, 3, 1.0}, {3, 1, 3, 1, 1.0},
        {1, 3, 1, 3, -1.0}, {2, 1, 2, 1, -1.0}, {3, 2, 3, 2, -1.0},
    };
  }
  return make_form(3, 3, entries);
}

}  // namespace biqrank
