#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "biqrank/numerics.hpp"

using namespace biqrank;

namespace {

SymMatrix random_symmetric(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> entries(static_cast<size_t>(dim) * dim);
  for (double& v : entries) v = dist(rng);
  return SymMatrix::from_rows(dim, entries);
}

double max_abs_diff(const SymMatrix& a, const SymMatrix& b) {
  double m = 0.0;
  for (int r = 0; r < a.dim(); ++r)
    for (int c = 0; c < a.dim(); ++c)
      m = std::max(m, std::abs(a(r, c) - b(r, c)));
  return m;
}

}  // namespace

TEST_CASE("symmetric storage stays exactly symmetric") {
  SymMatrix m = SymMatrix::from_rows(2, {1.0, 2.0, 4.0, 3.0});
  REQUIRE(m(0, 1) == m(1, 0));
  REQUIRE(m(0, 1) == Catch::Approx(3.0));
  m.set(0, 1, -7.5);
  REQUIRE(m(1, 0) == -7.5);
  m.add(1, 1, 2.0);
  REQUIRE(m(1, 1) == Catch::Approx(5.0));
}

TEST_CASE("matrix validation rejects malformed input") {
  REQUIRE_THROWS_AS(SymMatrix(0), InvalidMatrix);
  REQUIRE_THROWS_AS(SymMatrix::from_rows(2, {1.0, 2.0, 3.0}), InvalidMatrix);
  REQUIRE_THROWS_AS(
      SymMatrix::from_rows(1, {std::numeric_limits<double>::quiet_NaN()}),
      InvalidMatrix);
  SymMatrix m(2);
  REQUIRE_THROWS_AS(m(2, 0), InvalidIndex);
  SymMatrix other(3);
  REQUIRE_THROWS_AS(m.add_scaled(other, 1.0), DimensionMismatch);
  REQUIRE_THROWS_AS(frobenius_inner(m, other), DimensionMismatch);
}

TEST_CASE("eigenvalues of a diagonal matrix") {
  SymMatrix m = SymMatrix::diagonal({1.0, 0.0, 0.0, 1.0});
  EigenDecomposition e = eig_sym(m);
  REQUIRE(e.values.size() == 4);
  REQUIRE(e.values[0] == Catch::Approx(1.0));
  REQUIRE(e.values[1] == Catch::Approx(1.0));
  REQUIRE(e.values[2] == Catch::Approx(0.0).margin(1e-14));
  REQUIRE(e.values[3] == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("2x2 eigenvalues match the characteristic polynomial") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    SymMatrix m = random_symmetric(2, rng);
    const double tr = m(0, 0) + m(1, 1);
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double disc = std::sqrt(tr * tr / 4.0 - det);
    EigenDecomposition e = eig_sym(m);
    REQUIRE(e.values[0] == Catch::Approx(tr / 2.0 + disc).margin(1e-12));
    REQUIRE(e.values[1] == Catch::Approx(tr / 2.0 - disc).margin(1e-12));
  }
}

TEST_CASE("3x3 tridiagonal eigenvalues in closed form") {
  SymMatrix m = SymMatrix::from_rows(
      3, {2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0});
  EigenDecomposition e = eig_sym(m);
  const double r2 = std::sqrt(2.0);
  REQUIRE(e.values[0] == Catch::Approx(2.0 + r2).epsilon(1e-12));
  REQUIRE(e.values[1] == Catch::Approx(2.0).epsilon(1e-12));
  REQUIRE(e.values[2] == Catch::Approx(2.0 - r2).epsilon(1e-12));
}

TEST_CASE("eigendecomposition reconstructs the input") {
  std::mt19937_64 rng(11);
  for (int dim : {1, 2, 3, 5, 9, 16}) {
    for (int trial = 0; trial < 10; ++trial) {
      SymMatrix m = random_symmetric(dim, rng);
      EigenDecomposition e = eig_sym(m);
      for (size_t k = 1; k < e.values.size(); ++k)
        REQUIRE(e.values[k - 1] >= e.values[k]);
      SymMatrix back = reconstruct(e, dim);
      const double scale = std::max(1.0, m.frobenius_norm());
      REQUIRE(frobenius_distance(m, back) <= 1e-10 * scale);
      for (int j = 0; j < dim; ++j) {
        double norm = 0.0;
        for (double x : e.vectors[j]) norm += x * x;
        REQUIRE(norm == Catch::Approx(1.0).epsilon(1e-10));
        for (int k = j + 1; k < dim; ++k) {
          double dot = 0.0;
          for (int i = 0; i < dim; ++i) dot += e.vectors[j][i] * e.vectors[k][i];
          REQUIRE(std::abs(dot) <= 1e-10);
        }
      }
    }
  }
}

TEST_CASE("eigendecomposition is deterministic") {
  std::mt19937_64 rng(13);
  SymMatrix m = random_symmetric(8, rng);
  EigenDecomposition a = eig_sym(m);
  EigenDecomposition b = eig_sym(m);
  REQUIRE(a.values == b.values);
  REQUIRE(a.vectors == b.vectors);
}

TEST_CASE("psd projection clamps negative eigenvalues") {
  SymMatrix m = SymMatrix::diagonal({1.0, -1.0});
  SymMatrix p = psd_project(m);
  REQUIRE(p(0, 0) == Catch::Approx(1.0));
  REQUIRE(p(1, 1) == Catch::Approx(0.0).margin(1e-14));
  REQUIRE(p(0, 1) == Catch::Approx(0.0).margin(1e-14));

  SymMatrix again = psd_project(p);
  REQUIRE(max_abs_diff(p, again) <= 1e-12);
}

TEST_CASE("psd projection is Frobenius-nearest among sampled psd matrices") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    SymMatrix m = random_symmetric(4, rng);
    SymMatrix p = psd_project(m);
    EigenDecomposition pe = eig_sym(p);
    REQUIRE(pe.values.back() >= -1e-12);
    const double best = frobenius_distance(m, p);
    for (int probe = 0; probe < 200; ++probe) {
      SymMatrix q = psd_project(random_symmetric(4, rng));
      REQUIRE(frobenius_distance(m, q) >= best - 1e-9);
    }
  }
}

TEST_CASE("rank-capped projection of the identity") {
  SymMatrix eye = SymMatrix::identity(3);
  SymMatrix p = psd_project_rank_capped(eye, 1);
  // Any psd matrix of rank at most 1 is t*vv' with unit v; the squared
  // distance to I_3 is (t-1)^2 + 2, minimized at 2.
  const double d = frobenius_distance(eye, p);
  REQUIRE(d * d == Catch::Approx(2.0).epsilon(1e-10));
  REQUIRE(rank_eps(p) == 1);

  std::mt19937_64 rng(19);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int probe = 0; probe < 500; ++probe) {
    std::vector<double> v(3);
    for (double& x : v) x = dist(rng);
    double nrm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (nrm < 1e-8) continue;
    std::uniform_real_distribution<double> tdist(0.0, 3.0);
    const double t = tdist(rng);
    SymMatrix cand(3);
    for (int r = 0; r < 3; ++r)
      for (int c = r; c < 3; ++c)
        cand.set(r, c, t * v[r] / nrm * v[c] / nrm);
    REQUIRE(frobenius_distance(eye, cand) >= d - 1e-9);
  }
}

TEST_CASE("rank-capped projection caps the rank") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    SymMatrix m = random_symmetric(6, rng);
    for (int cap : {0, 1, 2, 3, 6, 8}) {
      SymMatrix p = psd_project_rank_capped(m, cap);
      REQUIRE(rank_eps(p) <= cap);
      EigenDecomposition pe = eig_sym(p);
      REQUIRE(pe.values.back() >= -1e-12);
    }
    SymMatrix full = psd_project_rank_capped(m, 6);
    REQUIRE(max_abs_diff(full, psd_project(m)) <= 1e-10);
  }
  REQUIRE_THROWS_AS(psd_project_rank_capped(SymMatrix(2), -1), InvalidRank);
}

TEST_CASE("numerical rank counts relative to the largest eigenvalue") {
  REQUIRE(rank_eps(SymMatrix::diagonal({1.0, 1e-14, -1e-14, 0.5})) == 2);
  REQUIRE(rank_eps(SymMatrix::diagonal({100.0, 1e-9})) == 1);
  REQUIRE(rank_eps(SymMatrix::diagonal({100.0, 1e-7})) == 2);
  REQUIRE(rank_eps(SymMatrix::identity(5)) == 5);
  REQUIRE(rank_eps(SymMatrix(3)) == 0);
  REQUIRE_THROWS_AS(rank_eps(SymMatrix(2), -1.0), InvalidMatrix);
}

TEST_CASE("cholesky solver round trips spd systems") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 5);
    SymMatrix a(n);
    for (int r = 0; r < n; ++r) {
      for (int c = r; c < n; ++c) a.set(r, c, dist(rng));
      a.add(r, r, static_cast<double>(n) + 1.0);  // diagonally dominant
    }
    std::vector<double> b(static_cast<std::size_t>(n));
    for (double& v : b) v = dist(rng);
    std::vector<double> x;
    REQUIRE(solve_spd(a, b, x));
    for (int r = 0; r < n; ++r) {
      double acc = 0.0;
      for (int c = 0; c < n; ++c) acc += a(r, c) * x[static_cast<std::size_t>(c)];
      REQUIRE(acc == Catch::Approx(b[static_cast<std::size_t>(r)]).margin(1e-10));
    }
  }

  // Indefinite and singular matrices are reported, not "solved".
  std::vector<double> x;
  REQUIRE_FALSE(solve_spd(SymMatrix::diagonal({1.0, -1.0}), {1.0, 1.0}, x));
  REQUIRE_FALSE(solve_spd(SymMatrix(2), {1.0, 1.0}, x));
  REQUIRE_THROWS_AS(solve_spd(SymMatrix::identity(3), {1.0}, x),
                    DimensionMismatch);
}
