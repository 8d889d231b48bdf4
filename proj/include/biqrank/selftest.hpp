#pragma once
// End-to-end acceptance suite. Each criterion re-derives its expected values
// from first principles where possible (exhaustive enumeration, closed-form
// arithmetic, planted constructions), so the checks are independent of the
// code paths they exercise. Criterion 2 repeats the 6x4 search with a full
// subset enumeration and is skippable for quick runs.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "biqrank/forms.hpp"
#include "biqrank/gram.hpp"
#include "biqrank/graphs.hpp"
#include "biqrank/sosrank.hpp"

namespace biqrank {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  bool skipped = false;
  std::string detail;
  double elapsed_ms = 0.0;
};

struct SelftestOptions {
  bool extended = true;        // include the exhaustive 6x4 criterion
  std::optional<int> only;     // run a single criterion by id
  int jobs = 1;
  std::uint64_t seed = 42;
  double residual_tol = 1e-8;   // decomposition residual bar (criterion 7)
  double identity_tol = 1e-10;  // relative Gram identity bar (criterion 9)
};

namespace detail {

// Independent oracle: enumerate every edge subset of K_{m,n} and test the
// quadrilateral condition directly on row masks. Only usable for m*n <= 24.
inline int exhaustive_max_c4free(int m, int n) {
  const int cells = m * n;
  int best = 0;
  for (std::uint32_t subset = 0; subset < (std::uint32_t{1} << cells); ++subset) {
    const int count = __builtin_popcount(subset);
    if (count <= best) continue;
    std::vector<std::uint32_t> rows(static_cast<std::size_t>(m), 0);
    for (int cell = 0; cell < cells; ++cell)
      if (subset & (std::uint32_t{1} << cell))
        rows[static_cast<std::size_t>(cell / n)] |= std::uint32_t{1} << (cell % n);
    bool ok = true;
    for (int a = 0; a < m && ok; ++a)
      for (int b = a + 1; b < m && ok; ++b)
        if (__builtin_popcount(rows[static_cast<std::size_t>(a)] &
                               rows[static_cast<std::size_t>(b)]) >= 2)
          ok = false;
    if (ok) best = count;
  }
  return best;
}

inline ZarankiewiczResult search_with_jobs(int m, int n, int jobs) {
  ZarankiewiczOptions opts;
  opts.jobs = jobs;
  return zarankiewicz(m, n, opts);
}

// The search keeps its column-pair mask on the right side, so wide-right
// inputs run transposed; the maximum itself is symmetric in the sides.
inline ZarankiewiczResult oriented_search(int m, int n, int jobs) {
  ZarankiewiczOptions opts;
  opts.jobs = jobs;
  const int a = std::max(m, n);
  const int b = std::min(m, n);
  opts.limit = a;
  return zarankiewicz(a, b, opts);
}

inline BiquadraticForm random_planted_sos(int m, int n, int r, std::mt19937_64& rng) {
  // A fresh distribution per call keeps the draw sequence a pure function of
  // the generator state (the normal distribution caches a second variate).
  std::normal_distribution<double> dist(0.0, 1.0);
  SosDecomposition dec;
  dec.m = m;
  dec.n = n;
  for (int t = 0; t < r; ++t) {
    std::vector<double> coeffs(static_cast<std::size_t>(m) * n);
    for (double& v : coeffs) v = dist(rng);
    dec.terms.push_back(std::move(coeffs));
  }
  return form_from_gram(decomposition_gram(dec), m, n);
}

inline BiquadraticForm random_dense_form(int m, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::uniform_int_distribution<int> mi(1, m);
  std::uniform_int_distribution<int> ni(1, n);
  std::vector<FormEntry> entries;
  for (int t = 0; t < 10; ++t)
    entries.push_back({mi(rng), ni(rng), mi(rng), ni(rng), dist(rng)});
  return make_form(m, n, entries);
}

struct CriterionCheck {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& complaint) {
    if (cond) return;
    ok = false;
    if (detail.tellp() > 0) detail << "; ";
    detail << complaint;
  }
};

inline CriterionResult criterion_small_table(const SelftestOptions& opts) {
  CriterionResult res{1, "zarankiewicz-small-table"};
  CriterionCheck c;
  const std::vector<std::tuple<int, int, int>> table{
      {3, 3, 6}, {3, 4, 7}, {4, 3, 7}, {4, 4, 9}, {5, 4, 10}, {5, 5, 12}};
  std::ostringstream values;
  for (const auto& [m, n, expect] : table) {
    ZarankiewiczResult r = search_with_jobs(m, n, opts.jobs);
    std::ostringstream where;
    where << "z(" << m << "," << n << ")";
    c.require(r.z == expect, where.str() + " != expected");
    c.require(is_c4_free(r.witness), where.str() + " witness has a quadrilateral");
    c.require(static_cast<int>(r.witness.edges.size()) == r.z,
              where.str() + " witness edge count mismatch");
    c.require(r.elapsed_ms <= 60000.0, where.str() + " over the 60 s budget");
    if (values.tellp() > 0) values << ", ";
    values << where.str() << "=" << r.z;
  }
  res.passed = c.ok;
  res.detail = c.ok ? values.str() + "; all witnesses quadrilateral-free"
                    : c.detail.str();
  return res;
}

inline CriterionResult criterion_exhaustive_6x4(const SelftestOptions& opts) {
  CriterionResult res{2, "zarankiewicz-6x4-exhaustive"};
  CriterionCheck c;
  ZarankiewiczResult r = search_with_jobs(6, 4, opts.jobs);
  c.require(r.z == 12, "search value != 12");
  c.require(is_c4_free(r.witness), "witness has a quadrilateral");
  // Two independent confirmations that 12 is the true maximum. Counting
  // column pairs: a quadrilateral-free 6x4 graph covers each of the C(4,2)=6
  // column pairs at most once, and 13 edges over 6 rows force at least 8
  // covered pairs, so 13 is impossible; the full 2^24 subset enumeration
  // reaches the same maximum.
  int pairs_needed = 0;
  {
    // Most balanced degree profile for 13 edges on 6 rows: 3+2+2+2+2+2.
    const int degs[6] = {3, 2, 2, 2, 2, 2};
    for (int d : degs) pairs_needed += d * (d - 1) / 2;
  }
  c.require(pairs_needed > 6, "pair-count argument lost its force");
  c.require(exhaustive_max_c4free(6, 4) == 12, "subset enumeration != 12");
  c.require(r.elapsed_ms <= 600000.0, "over the 10 min budget");
  res.passed = c.ok;
  res.detail = c.ok ? "z(6,4)=12 by search and by full subset enumeration; "
                      "13 edges would need 8 column pairs but only 6 exist"
                    : c.detail.str();
  return res;
}

inline CriterionResult criterion_reiman(const SelftestOptions& opts) {
  CriterionResult res{3, "reiman-bound-consistency"};
  CriterionCheck c;
  const std::vector<std::tuple<int, int, int>> floors{
      {3, 3, 7}, {3, 4, 8}, {4, 3, 8}, {4, 4, 10},
      {5, 4, 12}, {5, 5, 13}, {6, 4, 14}};
  std::ostringstream values;
  for (const auto& [m, n, expect_floor] : floors) {
    const int fl = static_cast<int>(std::floor(reiman_bound(m, n)));
    std::ostringstream where;
    where << "(" << m << "," << n << ")";
    c.require(fl == expect_floor, where.str() + " floor mismatch");
    const int z = search_with_jobs(m, n, opts.jobs).z;
    c.require(z <= fl, where.str() + " z exceeds the bound");
    if (values.tellp() > 0) values << ", ";
    values << where.str() << " z=" << z << "<=" << fl;
  }
  res.passed = c.ok;
  res.detail = c.ok ? values.str() : c.detail.str();
  return res;
}

inline CriterionResult criterion_rank_4x3(const SelftestOptions&) {
  CriterionResult res{4, "dense-4x3-rank-seven"};
  CriterionCheck c;
  BipartiteGraph g = max_c4free_graph_4x3();
  BiquadraticForm p = simple_form_from_graph(g);
  // Combinatorial bounds first: the orthogonality argument on the term-per-
  // edge decomposition gives 7 from below, the decomposition itself 7 from
  // above.
  c.require(orthogonality_rank_lower(p, identity_decomposition(g)) == 7,
            "orthogonality lower bound != 7");
  c.require(simple_rank_exact(g) == 7, "exact combinatorial rank != 7");

  RankSearchResult r = sos_rank_search(p, 6, 12);
  c.require(r.converged, "rank search did not converge");
  c.require(r.rank_lower == 7, "search lower bound != 7");
  c.require(r.rank_upper == 7, "search upper bound != 7");
  c.require(r.probes.size() >= 2, "probe log too short");
  if (r.probes.size() >= 2) {
    c.require(r.probes[0].cap == 6 && !r.probes[0].converged,
              "rank 6 unexpectedly feasible");
    c.require(r.probes[0].restarts_used == 8, "rank 6 not tried on all restarts");
    c.require(r.probes[1].cap == 7 && r.probes[1].converged,
              "rank 7 probe failed");
  }
  c.require(r.decomposition.terms.size() == 7, "term count != 7");
  c.require(r.decomposition.residual <= 1e-8, "residual too large");
  res.passed = c.ok;
  res.detail = c.ok ? "rank 7 exactly: lower 7 by orthogonality, upper 7 by "
                      "decomposition; probes fail at 6 and converge at 7"
                    : c.detail.str();
  return res;
}

inline CriterionResult criterion_rank_3x3(const SelftestOptions& opts) {
  CriterionResult res{5, "max-3x3-graph-rank-six"};
  CriterionCheck c;
  ZarankiewiczResult zr = search_with_jobs(3, 3, opts.jobs);
  c.require(zr.z == 6, "z(3,3) != 6");
  BiquadraticForm p = simple_form_from_graph(zr.witness);
  RankSearchResult r = sos_rank_search(p, 1, 9);
  c.require(r.converged, "rank search did not converge");
  c.require(r.rank_lower == 6, "lower bound != 6");
  c.require(r.rank_upper == 6, "upper bound != 6");
  c.require(r.decomposition.residual <= 1e-8, "residual too large");
  for (const RankProbe& probe : r.probes)
    if (probe.cap < 6)
      c.require(!probe.converged, "a cap below 6 converged");
  res.passed = c.ok;
  res.detail = c.ok ? "the maximum quadrilateral-free 3x3 graph yields a "
                      "square form of exact rank 6"
                    : c.detail.str();
  return res;
}

inline CriterionResult criterion_choi_seeds(const SelftestOptions&) {
  CriterionResult res{6, "choi-not-sos-across-seeds"};
  CriterionCheck c;
  BiquadraticForm p = choi_form(ChoiVariant::kClassical);
  double lo = 0.0, hi = -1.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    CertifyOptions copts;
    copts.seed = seed;
    SosCertificate cert = certify_sos(p, copts);
    std::ostringstream where;
    where << "seed " << seed;
    c.require(cert.status == SosStatus::kNotSos, where.str() + " not NOT_SOS");
    c.require(cert.lambda_star <= -1e-3, where.str() + " lambda above -1e-3");
    lo = std::min(lo, cert.lambda_star);
    hi = std::max(hi, cert.lambda_star);
  }
  res.passed = c.ok;
  if (c.ok) {
    std::ostringstream d;
    d << "NOT_SOS for every seed 1..10, lambda_star in [" << lo << ", " << hi << "]";
    res.detail = d.str();
  } else {
    res.detail = c.detail.str();
  }
  return res;
}

inline CriterionResult criterion_planted_roundtrip(const SelftestOptions& opts) {
  CriterionResult res{7, "planted-sos-roundtrip"};
  CriterionCheck c;
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<int> md(1, 4), nd(1, 4), rd(1, 5);
  int worst_rank_slack = 0;
  double worst_residual = 0.0;
  for (int i = 0; i < 200 && c.ok; ++i) {
    const int m = md(rng);
    const int n = nd(rng);
    const int r = rd(rng);
    BiquadraticForm p = random_planted_sos(m, n, r, rng);
    std::ostringstream where;
    where << "form " << i << " (m=" << m << ", n=" << n << ", r=" << r << ")";
    RankSearchResult sr = sos_rank_search(p, 1, m * n);
    c.require(sr.certificate.status == SosStatus::kSos, where.str() + " not SOS");
    c.require(sr.converged && sr.rank_upper.has_value(),
              where.str() + " rank search failed");
    if (sr.rank_upper) {
      const int planted = std::min(r, m * n);
      c.require(*sr.rank_upper <= planted, where.str() + " rank above planted");
      worst_rank_slack = std::max(worst_rank_slack, planted - *sr.rank_upper);
    }
    c.require(sr.decomposition.residual <= opts.residual_tol,
              where.str() + " residual over tolerance");
    worst_residual = std::max(worst_residual, sr.decomposition.residual);
  }
  res.passed = c.ok;
  if (c.ok) {
    std::ostringstream d;
    d << "200 planted forms certified and decomposed; worst residual "
      << worst_residual;
    res.detail = d.str();
  } else {
    res.detail = c.detail.str();
  }
  return res;
}

inline CriterionResult criterion_brute_force(const SelftestOptions& opts) {
  CriterionResult res{8, "exhaustive-search-agreement"};
  CriterionCheck c;
  int pairs = 0;
  for (int m = 1; m <= 12; ++m)
    for (int n = 1; m * n <= 12; ++n) {
      const int brute = exhaustive_max_c4free(m, n);
      const int searched = oriented_search(m, n, opts.jobs).z;
      std::ostringstream where;
      where << "(" << m << "," << n << ")";
      c.require(searched == brute, where.str() + " disagrees with enumeration");
      ++pairs;
    }
  res.passed = c.ok;
  if (c.ok) {
    std::ostringstream d;
    d << "search matches subset enumeration on all " << pairs
      << " shapes with m*n <= 12";
    res.detail = d.str();
  } else {
    res.detail = c.detail.str();
  }
  return res;
}

inline CriterionResult criterion_gram_identity(const SelftestOptions& opts) {
  CriterionResult res{9, "gram-family-identity"};
  CriterionCheck c;
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> coord(0.0, 2.0);
  std::uniform_real_distribution<double> pt(-1.0, 1.0);
  for (int trial = 0; trial < 50 && c.ok; ++trial) {
    const int m = 1 + static_cast<int>(rng() % 4);
    const int n = 1 + static_cast<int>(rng() % 4);
    BiquadraticForm p = random_dense_form(m, n, rng);
    GramSpace space = make_gram_space(p);
    const std::size_t expect =
        static_cast<std::size_t>(m * (m - 1) / 2) * (n * (n - 1) / 2);
    std::ostringstream where;
    where << "form " << trial << " (m=" << m << ", n=" << n << ")";
    c.require(space.basis.size() == expect, where.str() + " basis count wrong");
    for (int rep = 0; rep < 20 && c.ok; ++rep) {
      std::vector<double> gamma(space.basis.size());
      for (double& g : gamma) g = coord(rng);
      SymMatrix mat = gram_at(space, gamma);
      for (int sample = 0; sample < 100; ++sample) {
        std::vector<double> x(static_cast<std::size_t>(m));
        std::vector<double> y(static_cast<std::size_t>(n));
        std::vector<double> z(static_cast<std::size_t>(m) * n);
        for (double& v : x) v = pt(rng);
        for (double& v : y) v = pt(rng);
        for (int i = 1; i <= m; ++i)
          for (int j = 1; j <= n; ++j)
            z[static_cast<std::size_t>(kron_index(i, j, n))] =
                x[static_cast<std::size_t>(i - 1)] * y[static_cast<std::size_t>(j - 1)];
        double quad = 0.0;
        for (int r = 0; r < m * n; ++r)
          for (int col = 0; col < m * n; ++col)
            quad += z[static_cast<std::size_t>(r)] * mat(r, col) *
                    z[static_cast<std::size_t>(col)];
        const double direct = p.evaluate(x, y);
        if (std::abs(quad - direct) >
            opts.identity_tol * std::max(1.0, std::abs(direct))) {
          c.require(false, where.str() + " quadratic value drifts from evaluate");
          break;
        }
      }
    }
  }
  res.passed = c.ok;
  res.detail = c.ok ? "50 forms x 20 members x 100 points: quadratic form "
                      "values match direct evaluation; basis counts match "
                      "C(m,2)*C(n,2)"
                    : c.detail.str();
  return res;
}

inline CriterionResult criterion_scope(const SelftestOptions&) {
  CriterionResult res{10, "scope-acknowledgment"};
  res.passed = true;
  res.detail =
      "maximum SOS ranks beyond the instances exercised here, and whether "
      "that maximum always equals z(m,n), are outside what this suite can "
      "decide; criteria 4-5 certify only the lower-bound direction";
  return res;
}

}  // namespace detail

// Runs the acceptance criteria and reports one result per criterion. The
// exhaustive 6x4 criterion is skipped when extended is false (unless it is
// requested by id explicitly).
inline std::vector<CriterionResult> run_selftest(const SelftestOptions& opts = {}) {
  using Runner = CriterionResult (*)(const SelftestOptions&);
  const std::vector<Runner> crits{
      detail::criterion_small_table,    detail::criterion_exhaustive_6x4,
      detail::criterion_reiman,         detail::criterion_rank_4x3,
      detail::criterion_rank_3x3,       detail::criterion_choi_seeds,
      detail::criterion_planted_roundtrip, detail::criterion_brute_force,
      detail::criterion_gram_identity,  detail::criterion_scope};

  std::vector<CriterionResult> results;
  for (int id = 1; id <= static_cast<int>(crits.size()); ++id) {
    if (opts.only && *opts.only != id) continue;
    if (id == 2 && !opts.extended && !opts.only) {
      CriterionResult skip{2, "zarankiewicz-6x4-exhaustive"};
      skip.skipped = true;
      skip.passed = true;
      skip.detail = "skipped (extended suite disabled)";
      results.push_back(std::move(skip));
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = crits[static_cast<std::size_t>(id - 1)](opts);
    } catch (const std::exception& e) {
      r.id = id;
      r.name = "criterion-" + std::to_string(id);
      r.passed = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.elapsed_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace biqrank
