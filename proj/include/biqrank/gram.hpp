#pragma once

#include <cmath>
#include <vector>

#include "biqrank/errors.hpp"
#include "biqrank/forms.hpp"
#include "biqrank/numerics.hpp"

namespace biqrank {

// Position of x_i y_j (1-based i, j) in the Kronecker vector z = x (x) y.
inline int kron_index(int i, int j, int n) { return (i - 1) * n + (j - 1); }

// Writing P(x, y) = z' M z with z = x (x) y determines M only up to the
// symmetric matrices that vanish on the Kronecker variety. That nullity
// space is spanned by one element per (i < k, j < l): +1 at positions
// ((i,j),(k,l)) and ((k,l),(i,j)), -1 at ((i,l),(k,j)) and ((k,j),(i,l)).
// Each element has squared Frobenius norm 4 and disjoint support.
struct GramBasisElement {
  int i, j, k, l;  // 1-based, i < k, j < l
  int a, b;        // packed positions (i,j), (k,l): +1 entries
  int c, d;        // packed positions (i,l), (k,j): -1 entries
};

struct GramSpace {
  int m = 0;
  int n = 0;
  SymMatrix natural = SymMatrix(1);  // coefficient matrix M0
  std::vector<GramBasisElement> basis;

  int dim() const { return m * n; }
};

inline std::vector<GramBasisElement> nullity_basis(int m, int n) {
  std::vector<GramBasisElement> basis;
  for (int i = 1; i <= m; ++i)
    for (int k = i + 1; k <= m; ++k)
      for (int j = 1; j <= n; ++j)
        for (int l = j + 1; l <= n; ++l)
          basis.push_back({i, j, k, l, kron_index(i, j, n),
                           kron_index(k, l, n), kron_index(i, l, n),
                           kron_index(k, j, n)});
  return basis;
}

// Coefficient matrix of the form: M0[(i,j),(k,l)] = a(i,j,k,l).
inline SymMatrix natural_gram(const BiquadraticForm& p) {
  const int n = p.n();
  SymMatrix m0(p.m() * n);
  for (const auto& [t, a] : p.coefficients()) {
    // Distinct orbit members occupy distinct, mutually transposed cells.
    m0.set(kron_index(t[0], t[1], n), kron_index(t[2], t[3], n), a);
    m0.set(kron_index(t[0], t[3], n), kron_index(t[2], t[1], n), a);
  }
  return m0;
}

inline GramSpace make_gram_space(const BiquadraticForm& p) {
  GramSpace space;
  space.m = p.m();
  space.n = p.n();
  space.natural = natural_gram(p);
  space.basis = nullity_basis(p.m(), p.n());
  return space;
}

// Member M0 + sum_q gamma_q H_q of the Gram family.
inline SymMatrix gram_at(const GramSpace& space,
                         const std::vector<double>& gamma) {
  if (gamma.size() != space.basis.size())
    throw DimensionMismatch("gram_at: coordinate count");
  SymMatrix m = space.natural;
  for (size_t q = 0; q < gamma.size(); ++q) {
    const GramBasisElement& h = space.basis[q];
    m.add(h.a, h.b, gamma[q]);
    m.add(h.c, h.d, -gamma[q]);
  }
  return m;
}

// Coordinates of the orthogonal projection of X onto the Gram family,
// i.e. gamma_q = <X - M0, H_q> / ||H_q||^2 with ||H_q||^2 = 4.
inline std::vector<double> gram_coordinates(const GramSpace& space,
                                            const SymMatrix& x) {
  if (x.dim() != space.dim())
    throw DimensionMismatch("gram_coordinates: matrix dimension");
  std::vector<double> gamma(space.basis.size());
  for (size_t q = 0; q < gamma.size(); ++q) {
    const GramBasisElement& h = space.basis[q];
    const double dab = x(h.a, h.b) - space.natural(h.a, h.b);
    const double dcd = x(h.c, h.d) - space.natural(h.c, h.d);
    gamma[q] = 0.5 * (dab - dcd);
  }
  return gamma;
}

// Nearest member of the Gram family in Frobenius norm.
inline SymMatrix project_to_space(const GramSpace& space, const SymMatrix& x) {
  return gram_at(space, gram_coordinates(space, x));
}

// Reads a biquadratic form off an arbitrary symmetric matrix on the
// Kronecker index space: the form z' X z restricted to z = x (x) y.
inline BiquadraticForm form_from_gram(const SymMatrix& x, int m, int n) {
  if (x.dim() != m * n) throw DimensionMismatch("form_from_gram: dimension");
  std::vector<FormEntry> entries;
  for (int i = 1; i <= m; ++i) {
    for (int j = 1; j <= n; ++j) {
      const int p = kron_index(i, j, n);
      entries.push_back({i, j, i, j, x(p, p)});
      for (int l = j + 1; l <= n; ++l)
        entries.push_back({i, j, i, l, x(p, kron_index(i, l, n))});
      for (int k = i + 1; k <= m; ++k) {
        entries.push_back({i, j, k, j, x(p, kron_index(k, j, n))});
        for (int l = j + 1; l <= n; ++l) {
          // The monomial x_i x_k y_j y_l collects two symmetric pairs.
          const double c = x(p, kron_index(k, l, n)) +
                           x(kron_index(i, l, n), kron_index(k, j, n));
          entries.push_back({i, j, k, l, 0.5 * c});
        }
      }
    }
  }
  return make_form(m, n, entries);
}

// Sum-of-squares decomposition P = sum_p (sum_ij terms[p][i,j] x_i y_j)^2.
// Each term is an m x n bilinear coefficient matrix, stored row-major.
struct SosDecomposition {
  int m = 0;
  int n = 0;
  std::vector<std::vector<double>> terms;
  double residual = 0.0;
};

// Factors a psd member M = sum_p lambda_p u_p u_p' into bilinear squares,
// keeping eigenvalues above tol * max(1, lambda_max). The term count equals
// rank_eps(M, tol).
inline SosDecomposition decomposition_from_psd_gram(const SymMatrix& m0,
                                                    int m, int n,
                                                    double tol = 1e-8) {
  if (m0.dim() != m * n)
    throw DimensionMismatch("decomposition_from_psd_gram: dimension");
  EigenDecomposition e = eig_sym(m0);
  if (!e.values.empty() && e.values.back() < -tol)
    throw NotPsd("decomposition_from_psd_gram: matrix is not psd");
  const double thr = tol * std::max(1.0, e.values.empty() ? 0.0 : e.values[0]);
  SosDecomposition d;
  d.m = m;
  d.n = n;
  for (size_t p = 0; p < e.values.size(); ++p) {
    if (e.values[p] <= thr) continue;
    const double w = std::sqrt(e.values[p]);
    std::vector<double> term(e.vectors[p].size());
    for (size_t q = 0; q < term.size(); ++q) term[q] = w * e.vectors[p][q];
    d.terms.push_back(std::move(term));
  }
  return d;
}

// Gram matrix sum_p c_p c_p' of the decomposition's coefficient vectors.
inline SymMatrix decomposition_gram(const SosDecomposition& d) {
  const int dim = d.m * d.n;
  SymMatrix g(dim);
  for (const auto& term : d.terms) {
    if (static_cast<int>(term.size()) != dim)
      throw InvalidDecomposition("decomposition_gram: term size");
    for (int r = 0; r < dim; ++r)
      for (int c = r; c < dim; ++c) g.add(r, c, term[r] * term[c]);
  }
  return g;
}

// Largest absolute difference between the monomial coefficients of P and
// of the expanded decomposition.
inline double verify_decomposition(const BiquadraticForm& p,
                                   const SosDecomposition& d) {
  if (p.m() != d.m || p.n() != d.n)
    throw DimensionMismatch("verify_decomposition: sides differ");
  const BiquadraticForm q = form_from_gram(decomposition_gram(d), d.m, d.n);
  double worst = 0.0;
  for (int i = 1; i <= p.m(); ++i)
    for (int k = i; k <= p.m(); ++k)
      for (int j = 1; j <= p.n(); ++j)
        for (int l = j; l <= p.n(); ++l)
          worst = std::max(worst, std::abs(p.monomial_coeff(i, k, j, l) -
                                           q.monomial_coeff(i, k, j, l)));
  return worst;
}

// Largest violation of the quadrilateral relation
// <v_(i,j), v_(k,l)> + <v_(i,l), v_(k,j)> = 0 over i < k, j < l, where
// v_e collects the coefficients of x_i y_j across the decomposition's
// terms. For decompositions of square forms every such sum must vanish.
inline double check_cycle_condition(const SosDecomposition& d) {
  const SymMatrix g = decomposition_gram(d);
  double worst = 0.0;
  for (int i = 1; i <= d.m; ++i)
    for (int k = i + 1; k <= d.m; ++k)
      for (int j = 1; j <= d.n; ++j)
        for (int l = j + 1; l <= d.n; ++l)
          worst = std::max(
              worst, std::abs(g(kron_index(i, j, d.n), kron_index(k, l, d.n)) +
                              g(kron_index(i, l, d.n), kron_index(k, j, d.n))));
  return worst;
}

// Rank lower bound for decompositions of square forms of C4-free graphs:
// the per-edge coefficient vectors are unit length, vectors of edges
// sharing a vertex are orthogonal, and the quadrilateral relation holds,
// which together with C4-freeness forces linear independence. Hence every
// decomposition needs at least |E| terms.
inline int orthogonality_rank_lower(const BiquadraticForm& p,
                                    const SosDecomposition& d,
                                    double tol = 1e-8) {
  const BipartiteGraph g = graph_from_simple_form(p);  // NotSimpleForm if not
  if (!is_c4_free(g))
    throw NotC4Free("orthogonality_rank_lower: support contains a C4");
  if (verify_decomposition(p, d) > tol)
    throw InvalidDecomposition(
        "orthogonality_rank_lower: decomposition does not reproduce the form");
  const SymMatrix gram = decomposition_gram(d);
  for (const auto& [i, j] : g.edges) {
    const int e = kron_index(i, j, g.n);
    if (std::abs(gram(e, e) - 1.0) > tol)
      throw InvalidDecomposition(
          "orthogonality_rank_lower: edge vector is not unit length");
  }
  for (size_t s = 0; s < g.edges.size(); ++s) {
    for (size_t t = s + 1; t < g.edges.size(); ++t) {
      const auto& [i1, j1] = g.edges[s];
      const auto& [i2, j2] = g.edges[t];
      if (i1 != i2 && j1 != j2) continue;
      const double dot =
          gram(kron_index(i1, j1, g.n), kron_index(i2, j2, g.n));
      if (std::abs(dot) > tol)
        throw InvalidDecomposition(
            "orthogonality_rank_lower: vertex-sharing edges not orthogonal");
    }
  }
  if (check_cycle_condition(d) > tol)
    throw InvalidDecomposition(
        "orthogonality_rank_lower: quadrilateral relation violated");
  return static_cast<int>(g.edges.size());
}

// Identity decomposition of a square form: one term x_i y_j per edge.
inline SosDecomposition identity_decomposition(const BipartiteGraph& g) {
  SosDecomposition d;
  d.m = g.m;
  d.n = g.n;
  for (const auto& [i, j] : g.edges) {
    std::vector<double> term(static_cast<size_t>(g.m) * g.n, 0.0);
    term[kron_index(i, j, g.n)] = 1.0;
    d.terms.push_back(std::move(term));
  }
  return d;
}

// Exact SOS rank of the square form of a C4-free graph: the identity
// decomposition attains |E| terms and the orthogonality bound shows no
// decomposition can use fewer.
inline int simple_rank_exact(const BipartiteGraph& g) {
  if (!is_c4_free(g)) throw NotC4Free("simple_rank_exact: graph contains a C4");
  const BiquadraticForm p = simple_form_from_graph(g);
  if (p.is_zero()) return 0;
  return orthogonality_rank_lower(p, identity_decomposition(g));
}

}  // namespace biqrank
