#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "biqrank/gram.hpp"

using namespace biqrank;

namespace {

BiquadraticForm example_diag_form() {
  // x_1^2 y_1^2 + x_2^2 y_2^2 on R^2 x R^2.
  return make_form(2, 2, {{1, 1, 1, 1, 1.0}, {2, 2, 2, 2, 1.0}});
}

BiquadraticForm random_form(int m, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::uniform_int_distribution<int> mi(1, m);
  std::uniform_int_distribution<int> ni(1, n);
  std::vector<FormEntry> entries;
  for (int t = 0; t < 10; ++t)
    entries.push_back({mi(rng), ni(rng), mi(rng), ni(rng), dist(rng)});
  return make_form(m, n, entries);
}

double max_abs_diff(const SymMatrix& a, const SymMatrix& b) {
  double worst = 0.0;
  for (int r = 0; r < a.dim(); ++r)
    for (int c = 0; c < a.dim(); ++c)
      worst = std::max(worst, std::abs(a(r, c) - b(r, c)));
  return worst;
}

}  // namespace

TEST_CASE("kronecker indexing is row-major") {
  REQUIRE(kron_index(1, 1, 3) == 0);
  REQUIRE(kron_index(1, 3, 3) == 2);
  REQUIRE(kron_index(2, 1, 3) == 3);
  REQUIRE(kron_index(4, 3, 3) == 11);
}

TEST_CASE("nullity basis size and structure") {
  REQUIRE(nullity_basis(2, 2).size() == 1);
  REQUIRE(nullity_basis(3, 3).size() == 9);
  REQUIRE(nullity_basis(5, 4).size() == 60);
  REQUIRE(nullity_basis(1, 4).empty());
  REQUIRE(nullity_basis(4, 1).empty());

  const auto basis = nullity_basis(3, 3);
  GramSpace space = make_gram_space(
      make_form(3, 3, {{1, 1, 1, 1, 1.0}}));
  for (size_t q = 0; q < basis.size(); ++q) {
    std::vector<double> gamma(basis.size(), 0.0);
    gamma[q] = 1.0;
    SymMatrix h = gram_at(space, gamma);
    h.add_scaled(space.natural, -1.0);
    REQUIRE(h.frobenius_norm() == Catch::Approx(2.0));  // ||H_q||_F^2 = 4
    for (int p = 0; p < h.dim(); ++p)
      REQUIRE(h(p, p) == 0.0);
  }
  // Disjoint supports make the elements mutually orthogonal.
  for (size_t q = 0; q < basis.size(); ++q)
    for (size_t r = q + 1; r < basis.size(); ++r) {
      REQUIRE((basis[q].a != basis[r].a || basis[q].b != basis[r].b));
    }
}

TEST_CASE("natural gram of the diagonal example") {
  GramSpace space = make_gram_space(example_diag_form());
  REQUIRE(space.natural.dim() == 4);
  REQUIRE(max_abs_diff(space.natural,
                       SymMatrix::diagonal({1.0, 0.0, 0.0, 1.0})) == 0.0);
  REQUIRE(space.basis.size() == 1);
}

TEST_CASE("natural gram of the classical Choi form") {
  SymMatrix m0 = natural_gram(choi_form(ChoiVariant::kClassical));
  REQUIRE(m0.dim() == 9);
  const std::vector<double> diag{1, 1, 0, 0, 1, 1, 1, 0, 1};
  for (int p = 0; p < 9; ++p) REQUIRE(m0(p, p) == diag[p]);
  REQUIRE(m0(kron_index(1, 1, 3), kron_index(2, 2, 3)) == -0.5);
  REQUIRE(m0(kron_index(1, 2, 3), kron_index(2, 1, 3)) == -0.5);
  REQUIRE(m0(kron_index(2, 2, 3), kron_index(3, 3, 3)) == -0.5);
  REQUIRE(m0(kron_index(1, 1, 3), kron_index(3, 3, 3)) == -0.5);
  REQUIRE(m0(kron_index(1, 1, 3), kron_index(2, 3, 3)) == 0.0);
  REQUIRE(m0.frobenius_norm() == Catch::Approx(3.0));
}

TEST_CASE("form and gram representations round trip") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 3);
    const int n = 2 + static_cast<int>(rng() % 2);
    BiquadraticForm p = random_form(m, n, rng);
    BiquadraticForm q = form_from_gram(natural_gram(p), m, n);
    REQUIRE(q.coefficients().size() == p.coefficients().size());
    for (const auto& [t, a] : p.coefficients())
      REQUIRE(q.coefficient(t[0], t[1], t[2], t[3]) ==
              Catch::Approx(a).margin(1e-13));
  }
}

TEST_CASE("every gram member represents the form") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> coord(0.0, 2.0);
  std::uniform_real_distribution<double> pt(-1.0, 1.0);
  for (int trial = 0; trial < 15; ++trial) {
    const int m = 2 + static_cast<int>(rng() % 2);
    const int n = 2 + static_cast<int>(rng() % 2);
    BiquadraticForm p = random_form(m, n, rng);
    GramSpace space = make_gram_space(p);
    for (int rep = 0; rep < 4; ++rep) {
      std::vector<double> gamma(space.basis.size());
      for (double& g : gamma) g = coord(rng);
      SymMatrix mat = gram_at(space, gamma);
      for (int sample = 0; sample < 10; ++sample) {
        std::vector<double> x(m), y(n), z(m * n);
        for (double& v : x) v = pt(rng);
        for (double& v : y) v = pt(rng);
        for (int i = 1; i <= m; ++i)
          for (int j = 1; j <= n; ++j)
            z[kron_index(i, j, n)] = x[i - 1] * y[j - 1];
        double quad = 0.0;
        for (int r = 0; r < m * n; ++r)
          for (int c = 0; c < m * n; ++c) quad += z[r] * mat(r, c) * z[c];
        const double direct = p.evaluate(x, y);
        REQUIRE(std::abs(quad - direct) <= 1e-10 * std::max(1.0, std::abs(direct)));
      }
    }
  }
}

TEST_CASE("projection onto the gram family") {
  GramSpace space = make_gram_space(example_diag_form());
  SymMatrix target = gram_at(space, {3.0});
  SymMatrix x = target;
  x.add(0, 0, 1.0);  // step off the family in a non-member direction
  REQUIRE(gram_coordinates(space, x) == std::vector<double>{3.0});
  SymMatrix proj = project_to_space(space, x);
  REQUIRE(max_abs_diff(proj, target) <= 1e-13);

  // Nearest point: no sampled member is closer.
  std::mt19937_64 rng(43);
  std::normal_distribution<double> coord(0.0, 2.0);
  const double best = frobenius_distance(x, proj);
  for (int probe = 0; probe < 200; ++probe)
    REQUIRE(frobenius_distance(x, gram_at(space, {coord(rng)})) >=
            best - 1e-12);

  REQUIRE_THROWS_AS(gram_at(space, {1.0, 2.0}), DimensionMismatch);
  REQUIRE_THROWS_AS(gram_coordinates(space, SymMatrix(9)), DimensionMismatch);
}

TEST_CASE("projection is idempotent on random input") {
  std::mt19937_64 rng(47);
  std::normal_distribution<double> dist(0.0, 1.0);
  BiquadraticForm p = random_form(3, 3, rng);
  GramSpace space = make_gram_space(p);
  std::vector<double> raw(81);
  for (double& v : raw) v = dist(rng);
  SymMatrix x = SymMatrix::from_rows(9, raw);
  SymMatrix p1 = project_to_space(space, x);
  SymMatrix p2 = project_to_space(space, p1);
  REQUIRE(max_abs_diff(p1, p2) <= 1e-12);
}

TEST_CASE("factoring a psd gram matrix into squares") {
  SymMatrix m0 = SymMatrix::diagonal({1.0, 0.0, 0.0, 1.0});
  SosDecomposition d = decomposition_from_psd_gram(m0, 2, 2);
  REQUIRE(d.terms.size() == 2);
  REQUIRE(d.terms[0][0] == Catch::Approx(1.0));
  REQUIRE(d.terms[0][1] == Catch::Approx(0.0).margin(1e-14));
  REQUIRE(d.terms[1][3] == Catch::Approx(1.0));
  REQUIRE(verify_decomposition(example_diag_form(), d) <= 1e-12);

  REQUIRE_THROWS_AS(decomposition_from_psd_gram(
                        SymMatrix::diagonal({1.0, -1.0}), 1, 2),
                    NotPsd);
  // Slightly negative eigenvalues inside the tolerance are clamped.
  SosDecomposition near =
      decomposition_from_psd_gram(SymMatrix::diagonal({1.0, -5e-9}), 1, 2);
  REQUIRE(near.terms.size() == 1);
}

TEST_CASE("term count equals the numerical rank") {
  std::mt19937_64 rng(53);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int rank = 1 + static_cast<int>(rng() % 4);
    SymMatrix g(6);
    for (int p = 0; p < rank; ++p) {
      std::vector<double> v(6);
      for (double& x : v) x = dist(rng);
      for (int r = 0; r < 6; ++r)
        for (int c = r; c < 6; ++c) g.add(r, c, v[r] * v[c]);
    }
    SosDecomposition d = decomposition_from_psd_gram(g, 2, 3, 1e-8);
    REQUIRE(static_cast<int>(d.terms.size()) == rank_eps(g, 1e-8));
    REQUIRE(static_cast<int>(d.terms.size()) == rank);
  }
}

TEST_CASE("decomposition verification measures coefficient error") {
  BipartiteGraph g = max_c4free_graph_4x3();
  BiquadraticForm p = simple_form_from_graph(g);
  SosDecomposition d = identity_decomposition(g);
  REQUIRE(verify_decomposition(p, d) == 0.0);

  SosDecomposition bad = d;
  bad.terms[0][kron_index(1, 1, 3)] = 1.25;
  REQUIRE(verify_decomposition(p, bad) >= 0.5);

  SosDecomposition mismatched = identity_decomposition(make_graph(2, 2, {}));
  REQUIRE_THROWS_AS(verify_decomposition(p, mismatched), DimensionMismatch);
}

TEST_CASE("quadrilateral relation of decompositions") {
  // Identity terms satisfy the relation exactly.
  REQUIRE(check_cycle_condition(identity_decomposition(
              max_c4free_graph_4x3())) == 0.0);

  // A rotated pair of terms still decomposes the same diagonal form and
  // still satisfies the relation.
  const double th = 0.3;
  SosDecomposition rot;
  rot.m = 2;
  rot.n = 2;
  rot.terms = {{std::cos(th), 0.0, 0.0, std::sin(th)},
               {-std::sin(th), 0.0, 0.0, std::cos(th)}};
  REQUIRE(verify_decomposition(example_diag_form(), rot) <= 1e-15);
  REQUIRE(check_cycle_condition(rot) <= 1e-15);

  // A single cross term (x_1 y_1 + x_2 y_2)^2 violates it maximally.
  SosDecomposition cross;
  cross.m = 2;
  cross.n = 2;
  cross.terms = {{1.0, 0.0, 0.0, 1.0}};
  REQUIRE(check_cycle_condition(cross) == Catch::Approx(1.0));
}

TEST_CASE("orthogonality lower bound on square forms") {
  BipartiteGraph g43 = max_c4free_graph_4x3();
  BiquadraticForm p43 = simple_form_from_graph(g43);
  REQUIRE(orthogonality_rank_lower(p43, identity_decomposition(g43)) == 7);

  BipartiteGraph g33 = make_graph(
      3, 3, {{1, 1}, {2, 2}, {3, 3}, {1, 2}, {2, 3}, {3, 1}});
  BiquadraticForm p33 = simple_form_from_graph(g33);
  REQUIRE(orthogonality_rank_lower(p33, identity_decomposition(g33)) == 6);

  REQUIRE_THROWS_AS(
      orthogonality_rank_lower(choi_form(ChoiVariant::kClassical),
                               SosDecomposition{3, 3, {}, 0.0}),
      NotSimpleForm);

  BipartiteGraph k22 = make_graph(2, 2, {{1, 1}, {1, 2}, {2, 1}, {2, 2}});
  BiquadraticForm pk22 = simple_form_from_graph(k22);
  REQUIRE_THROWS_AS(
      orthogonality_rank_lower(pk22, identity_decomposition(k22)), NotC4Free);

  SosDecomposition wrong = identity_decomposition(g43);
  wrong.terms.pop_back();
  REQUIRE_THROWS_AS(orthogonality_rank_lower(p43, wrong),
                    InvalidDecomposition);
}

TEST_CASE("exact rank of square forms of C4-free graphs") {
  REQUIRE(simple_rank_exact(max_c4free_graph_4x3()) == 7);
  REQUIRE(simple_rank_exact(make_graph(
              3, 3, {{1, 1}, {2, 2}, {3, 3}, {1, 2}, {2, 3}, {3, 1}})) == 6);
  REQUIRE(simple_rank_exact(make_graph(2, 2, {})) == 0);
  REQUIRE(simple_rank_exact(make_graph(2, 2, {{1, 1}})) == 1);
  REQUIRE_THROWS_AS(
      simple_rank_exact(make_graph(2, 2, {{1, 1}, {1, 2}, {2, 1}, {2, 2}})),
      NotC4Free);
}
