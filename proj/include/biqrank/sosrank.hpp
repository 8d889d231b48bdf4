#pragma once
// SOS certification and minimum-rank Gram search for biquadratic forms.
//
// certify_sos decides whether a form is a sum of squares by hunting for a
// positive semidefinite member of its Gram family. sos_rank_search then
// brackets the smallest rank such a member can have and extracts an explicit
// decomposition into squares of bilinear forms.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "biqrank/errors.hpp"
#include "biqrank/forms.hpp"
#include "biqrank/gram.hpp"
#include "biqrank/graphs.hpp"
#include "biqrank/numerics.hpp"

namespace biqrank {

enum class SosStatus {
  kSos,           // a PSD Gram member was found (or certified within tolerance)
  kNotSos,        // the eigenvalue ascent stalled clearly below zero
  kInconclusive,  // neither outcome could be established
};

inline const char* to_string(SosStatus s) {
  switch (s) {
    case SosStatus::kSos: return "SOS";
    case SosStatus::kNotSos: return "NOT_SOS";
    case SosStatus::kInconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

struct CertifyOptions {
  // |lambda| below cert_tol counts as reaching zero; a form is reported SOS
  // when a Gram member with minimum eigenvalue >= -cert_tol is found.
  double cert_tol = 1e-7;
  // NOT_SOS additionally requires the ascent to stall at least this far
  // below zero. The band between the two tolerances is INCONCLUSIVE.
  double cert_margin = 1e-4;
  int max_iterations = 5000;  // per restart, in every phase
  int restarts = 16;
  std::uint64_t seed = 42;
};

// Outcome of certify_sos. lambda_star is the minimum eigenvalue of `witness`,
// the best Gram family member found (both on the scale of the input form);
// `gamma` holds the family coordinates of the witness. For non-SOS outcomes
// `stalled` distinguishes a genuinely flat ascent from one that ran out of
// iterations.
struct SosCertificate {
  SosStatus status = SosStatus::kInconclusive;
  double lambda_star = -std::numeric_limits<double>::infinity();
  std::vector<double> gamma;
  SymMatrix witness{1};
  int iterations = 0;
  int restarts_used = 0;
  bool stalled = true;
};

namespace detail {

inline std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t salt) {
  return std::mt19937_64(seed * 0x9E3779B97F4A7C15ULL + salt);
}

// One alternating-projection run between the Gram family and the cone of PSD
// matrices of rank at most `cap` (cap >= dimension means the full cone).
struct ApRun {
  bool converged = false;
  double best_gap = std::numeric_limits<double>::infinity();
  std::vector<double> gamma;  // family coordinates of the best iterate
  int iterations = 0;
};

// The iteration alternates from the family side, so the returned coordinates
// always describe a family member whose distance to the (rank-capped) PSD
// cone is `best_gap`. A 200-iteration window with relative improvement below
// 0.1% aborts runs that flatline far from the target; with the rank capped
// the problem is nonconvex and such stalls are common, which multi-restart
// callers handle.
inline ApRun alternating_projections(const GramSpace& space, std::vector<double> start,
                                     int cap, double tol, int max_iterations) {
  ApRun run;
  run.gamma = std::move(start);
  SymMatrix x = gram_at(space, run.gamma);
  const int dim = x.dim();
  double run_best = std::numeric_limits<double>::infinity();
  double window_best = std::numeric_limits<double>::infinity();
  int window_count = 0;
  for (int it = 1; it <= max_iterations; ++it) {
    run.iterations = it;
    SymMatrix y = cap >= dim ? psd_project(x) : psd_project_rank_capped(x, cap);
    std::vector<double> coords = gram_coordinates(space, y);
    SymMatrix back = gram_at(space, coords);
    const double gap = frobenius_distance(y, back);
    run_best = std::min(run_best, gap);
    if (gap < run.best_gap) {
      run.best_gap = gap;
      run.gamma = std::move(coords);
    }
    x = std::move(back);
    if (gap <= tol) {
      run.converged = true;
      break;
    }
    if (++window_count >= 200) {
      if (run_best > window_best * (1.0 - 1e-3) && gap > 100.0 * tol) break;
      window_best = run_best;
      window_count = 0;
    }
  }
  return run;
}

// When an alternating-projection run flatlines this close to the target (in
// normalized units), the two sets likely meet tangentially and a factored
// Newton finisher is worth attempting.
inline constexpr double kPolishThreshold = 1e-2;
inline constexpr int kPolishMaxSteps = 40;
inline constexpr int kPolishMaxVars = 200;

// Component of (V V^T - natural) orthogonal to the family span. Zero exactly
// when V V^T is a Gram family member; V is dim x cap, stored row-major.
inline SymMatrix factored_residual(const GramSpace& space, const std::vector<double>& v,
                                   int dim, int cap) {
  SymMatrix vvt(dim);
  for (int a = 0; a < dim; ++a)
    for (int b = a; b < dim; ++b) {
      double acc = 0.0;
      for (int t = 0; t < cap; ++t)
        acc += v[static_cast<std::size_t>(a) * cap + t] * v[static_cast<std::size_t>(b) * cap + t];
      vvt.set(a, b, acc);
    }
  SymMatrix delta = vvt;
  delta.add_scaled(space.natural, -1.0);
  // The basis elements have disjoint supports and squared norm 4, so the
  // span component can be removed element by element.
  for (const GramBasisElement& h : space.basis) {
    const double coef = (delta(h.a, h.b) - delta(h.c, h.d)) * 0.5;
    delta.add(h.a, h.b, -coef);
    delta.add(h.c, h.d, coef);
  }
  return delta;
}

// Levenberg-Marquardt on f(V) = ||factored_residual(V)||^2 with damping
// proportional to the residual norm, which keeps the convergence fast even
// when the Jacobian is rank-deficient at the solution (the tangential case
// alternating projections cannot finish). Returns true when the residual
// dropped below tol; V is updated in place either way.
inline bool polish_factor(const GramSpace& space, std::vector<double>& v, int dim, int cap,
                          double tol, int* steps_taken) {
  const int nv = dim * cap;
  SymMatrix r = factored_residual(space, v, dim, cap);
  double rn = r.frobenius_norm();
  double mu_scale = 1.0;
  for (int step = 0; step < kPolishMaxSteps; ++step) {
    if (steps_taken) ++*steps_taken;
    if (rn <= tol) return true;
    // Columns of the Jacobian: perp component of E_{at} V^T + V E_{at}^T.
    std::vector<SymMatrix> cols;
    cols.reserve(static_cast<std::size_t>(nv));
    for (int a = 0; a < dim; ++a)
      for (int t = 0; t < cap; ++t) {
        SymMatrix c(dim);
        for (int b = 0; b < dim; ++b) c.add(a, b, v[static_cast<std::size_t>(b) * cap + t]);
        c.add(a, a, v[static_cast<std::size_t>(a) * cap + t]);  // diagonal doubles
        for (const GramBasisElement& h : space.basis) {
          const double coef = (c(h.a, h.b) - c(h.c, h.d)) * 0.5;
          c.add(h.a, h.b, -coef);
          c.add(h.c, h.d, coef);
        }
        cols.push_back(std::move(c));
      }
    SymMatrix jtj(nv);
    std::vector<double> jtr(static_cast<std::size_t>(nv));
    for (int i = 0; i < nv; ++i) {
      jtr[static_cast<std::size_t>(i)] = frobenius_inner(cols[static_cast<std::size_t>(i)], r);
      for (int j = i; j < nv; ++j)
        jtj.set(i, j, frobenius_inner(cols[static_cast<std::size_t>(i)],
                                      cols[static_cast<std::size_t>(j)]));
    }
    std::vector<double> neg(static_cast<std::size_t>(nv));
    for (int i = 0; i < nv; ++i) neg[static_cast<std::size_t>(i)] = -jtr[static_cast<std::size_t>(i)];
    bool accepted = false;
    for (int tries = 0; tries < 20 && !accepted; ++tries) {
      const double mu = mu_scale * rn;
      SymMatrix damped = jtj;
      for (int i = 0; i < nv; ++i) damped.add(i, i, mu);
      std::vector<double> dv;
      if (!solve_spd(damped, neg, dv)) {
        mu_scale *= 8.0;
        continue;
      }
      std::vector<double> cand(v);
      for (int i = 0; i < nv; ++i) cand[static_cast<std::size_t>(i)] += dv[static_cast<std::size_t>(i)];
      SymMatrix rc = factored_residual(space, cand, dim, cap);
      const double rcn = rc.frobenius_norm();
      if (rcn < rn) {
        v = std::move(cand);
        r = std::move(rc);
        rn = rcn;
        mu_scale = std::max(mu_scale * 0.25, 1e-4);
        accepted = true;
      } else {
        mu_scale *= 8.0;
      }
    }
    if (!accepted) return rn <= tol;
  }
  return rn <= tol;
}

// Attempts the Newton finisher on the best iterate of a stalled run; on
// success rewrites the run as converged, with coordinates recomputed (and the
// gap re-verified) from the polished member.
inline void try_polish(const GramSpace& space, ApRun& run, int cap, double tol) {
  if (run.converged || !(run.best_gap <= kPolishThreshold)) return;
  const int dim = space.natural.dim();
  // Full-cone stalls are left to the rank-capped phases, where the finisher
  // works on a far smaller system.
  if (cap >= dim || dim * cap > kPolishMaxVars) return;
  SymMatrix x = gram_at(space, run.gamma);
  SymMatrix y = cap >= dim ? psd_project(x) : psd_project_rank_capped(x, cap);
  EigenDecomposition e = eig_sym(y);
  std::vector<double> v(static_cast<std::size_t>(dim) * cap, 0.0);
  for (int t = 0; t < cap && t < dim; ++t) {
    const double lam = e.values[static_cast<std::size_t>(t)];
    if (lam <= 0.0) continue;
    const double root = std::sqrt(lam);
    for (int a = 0; a < dim; ++a)
      v[static_cast<std::size_t>(a) * cap + t] =
          root * e.vectors[static_cast<std::size_t>(t)][static_cast<std::size_t>(a)];
  }
  int steps = 0;
  if (!polish_factor(space, v, dim, cap, tol, &steps)) {
    run.iterations += steps;
    return;
  }
  run.iterations += steps;
  SymMatrix member(dim);
  for (int a = 0; a < dim; ++a)
    for (int b = a; b < dim; ++b) {
      double acc = 0.0;
      for (int t = 0; t < cap; ++t)
        acc += v[static_cast<std::size_t>(a) * cap + t] * v[static_cast<std::size_t>(b) * cap + t];
      member.set(a, b, acc);
    }
  std::vector<double> coords = gram_coordinates(space, member);
  const double gap = frobenius_distance(member, gram_at(space, coords));
  if (gap <= tol) {
    run.converged = true;
    run.best_gap = gap;
    run.gamma = std::move(coords);
  }
}

// Multi-restart feasibility probe at one rank cap. Restart styles rotate
// between the given center (then perturbations of it with growing magnitude),
// fresh unit Gaussian draws, and small draws around the natural member, so a
// stall in one basin does not doom the probe. Deterministic for fixed seed
// and salt; stops at the first converged run.
struct ProbeRun {
  ApRun best;  // converged run, or the run with the smallest gap
  int restarts_used = 0;
  int iterations = 0;
};

inline ProbeRun capped_probe(const GramSpace& space, const std::vector<double>* center,
                             int cap, double tol, int max_iterations, int restarts,
                             double sigma, std::uint64_t seed, std::uint64_t salt) {
  ProbeRun probe;
  const std::size_t q = space.basis.size();
  for (int rs = 0; rs < restarts; ++rs) {
    std::vector<double> start(q, 0.0);
    auto rng = seeded_rng(seed, salt * 1024 + static_cast<std::uint64_t>(rs));
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int style = rs % 3;
    if (rs == 0) {
      if (center) start = *center;
    } else if (style == 0) {
      if (center) start = *center;
      const double spread = sigma * static_cast<double>(1 << (rs / 6));
      for (double& v : start) v += spread * gauss(rng);
    } else if (style == 1) {
      for (double& v : start) v = gauss(rng);
    } else if (rs == 2 && center) {
      // exact natural member, distinct from the center
    } else {
      for (double& v : start) v = 0.3 * gauss(rng);
    }
    ApRun run = alternating_projections(space, std::move(start), cap, tol, max_iterations);
    try_polish(space, run, cap, tol);
    probe.restarts_used = rs + 1;
    probe.iterations += run.iterations;
    if (run.converged) {
      probe.best = std::move(run);
      return probe;
    }
    if (run.best_gap < probe.best.best_gap) probe.best = std::move(run);
  }
  return probe;
}

// One subgradient-ascent run maximizing lambda_min over the (normalized)
// Gram family. Polyak-style level steps: aim delta above the incumbent,
// halve delta whenever a 50-iteration window fails to gain delta/4.
struct AscentRun {
  double lambda_best = -std::numeric_limits<double>::infinity();
  std::vector<double> gamma_best;
  int iterations = 0;
  bool hit_cap = false;
};

inline AscentRun ascend(const GramSpace& space, const SymMatrix& m0_scaled,
                        std::vector<double> gamma, int max_iterations) {
  AscentRun run;
  run.gamma_best = gamma;
  const std::size_t dim = space.basis.size();
  double delta = 0.1;
  double window_base = -std::numeric_limits<double>::infinity();
  int window_count = 0;

  std::vector<double> g(dim);
  for (int iter = 0; iter < max_iterations; ++iter) {
    SymMatrix m = m0_scaled;
    for (std::size_t q = 0; q < dim; ++q) {
      const GramBasisElement& h = space.basis[q];
      m.add(h.a, h.b, gamma[q]);
      m.add(h.c, h.d, -gamma[q]);
    }
    EigenDecomposition e = eig_sym(m);
    const double lambda = e.values.back();
    ++run.iterations;
    if (lambda > run.lambda_best) {
      run.lambda_best = lambda;
      run.gamma_best = gamma;
    }

    const std::vector<double>& u = e.vectors.back();
    double gn2 = 0.0;
    for (std::size_t q = 0; q < dim; ++q) {
      const GramBasisElement& h = space.basis[q];
      g[q] = 2.0 * (u[static_cast<std::size_t>(h.a)] * u[static_cast<std::size_t>(h.b)] -
                    u[static_cast<std::size_t>(h.c)] * u[static_cast<std::size_t>(h.d)]);
      gn2 += g[q] * g[q];
    }
    if (gn2 < 1e-24) return run;  // stationary for the sampled eigenvector

    const double target = run.lambda_best + delta;
    const double step = (target - lambda) / gn2;
    for (std::size_t q = 0; q < dim; ++q) gamma[q] += step * g[q];

    if (++window_count >= 50) {
      if (run.lambda_best - window_base < 0.25 * delta) {
        delta *= 0.5;
        if (delta < 1e-10) return run;  // level exhausted: stalled
      }
      window_base = run.lambda_best;
      window_count = 0;
    }
  }
  run.hit_cap = true;
  return run;
}

}  // namespace detail

// Decides whether a biquadratic form is a sum of squares.
//
// Phase 1 alternates projections between the Gram family and the full PSD
// cone; convergence exhibits a PSD member and settles the question. Some SOS
// forms only admit singular PSD members which the full cone approaches too
// slowly (the two sets meet tangentially), so phase 2 repeats the probe with
// the rank capped at each level in turn, which restores fast local
// convergence near low-rank solutions. Phase 3, reached only when no PSD
// member was found, estimates the best achievable minimum eigenvalue by
// subgradient ascent: since that eigenvalue is concave over the family, a
// multi-start ascent stalling clearly below zero is strong evidence reported
// as NOT_SOS; anything short of that is INCONCLUSIVE.
//
// The search runs on the form normalized to unit Frobenius norm, so the
// tolerances are relative to the input scale in the same way for every form;
// reported quantities are mapped back to the original scale.
inline SosCertificate certify_sos(const BiquadraticForm& p, const CertifyOptions& opts = {}) {
  GramSpace space = make_gram_space(p);
  SosCertificate cert;
  cert.gamma.assign(space.basis.size(), 0.0);

  if (p.is_zero()) {
    cert.status = SosStatus::kSos;
    cert.lambda_star = 0.0;
    cert.witness = space.natural;
    cert.stalled = false;
    return cert;
  }

  const double s = space.natural.frobenius_norm();
  GramSpace scaled = space;
  scaled.natural.scale(1.0 / s);
  const int dim = scaled.natural.dim();
  const double ap_tol = 1e-9 / s;  // absolute 1e-9 on the original scale

  const auto finish_sos = [&](const std::vector<double>& gamma_scaled) {
    cert.status = SosStatus::kSos;
    for (std::size_t q = 0; q < gamma_scaled.size(); ++q) cert.gamma[q] = s * gamma_scaled[q];
    cert.witness = gram_at(space, cert.gamma);
    EigenDecomposition e = eig_sym(cert.witness);
    cert.lambda_star = e.values.back();
    cert.stalled = false;
  };

  // Phase 1: the full PSD cone.
  detail::ProbeRun full = detail::capped_probe(scaled, nullptr, dim, ap_tol,
                                               opts.max_iterations, opts.restarts, 0.1,
                                               opts.seed, 0xA1);
  cert.iterations += full.iterations;
  cert.restarts_used += full.restarts_used;
  if (full.best.converged) {
    finish_sos(full.best.gamma);
    return cert;
  }

  // Phase 2: rank-capped probes, smallest cap first, seeded with the best
  // phase-1 iterate.
  for (int cap = 1; cap < dim; ++cap) {
    detail::ProbeRun probe = detail::capped_probe(scaled, &full.best.gamma, cap, ap_tol,
                                                  opts.max_iterations, opts.restarts, 0.1,
                                                  opts.seed, 0xB1 + static_cast<std::uint64_t>(cap));
    cert.iterations += probe.iterations;
    cert.restarts_used += probe.restarts_used;
    if (probe.best.converged) {
      finish_sos(probe.best.gamma);
      return cert;
    }
  }

  // Phase 3: multi-start subgradient ascent on the minimum eigenvalue.
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> best_gamma(space.basis.size(), 0.0);
  bool any_cap = false;
  for (int rs = 0; rs < opts.restarts; ++rs) {
    std::vector<double> gamma(space.basis.size(), 0.0);
    if (rs > 0) {
      auto rng = detail::seeded_rng(opts.seed, static_cast<std::uint64_t>(rs));
      std::normal_distribution<double> dist(0.0, 1.0);
      for (double& g : gamma) g = dist(rng);
    }
    detail::AscentRun run =
        detail::ascend(space, scaled.natural, std::move(gamma), opts.max_iterations);
    cert.iterations += run.iterations;
    ++cert.restarts_used;
    any_cap = any_cap || run.hit_cap;
    if (run.lambda_best > best) {
      best = run.lambda_best;
      best_gamma = run.gamma_best;
    }
    if (best >= 0.0) break;  // certified; remaining restarts are redundant
  }

  cert.lambda_star = best * s;
  for (std::size_t q = 0; q < best_gamma.size(); ++q) cert.gamma[q] = s * best_gamma[q];
  cert.witness = gram_at(space, cert.gamma);
  cert.stalled = !any_cap;
  if (cert.lambda_star >= -opts.cert_tol) {
    cert.status = SosStatus::kSos;
    cert.stalled = false;
  } else if (cert.lambda_star <= -opts.cert_margin && cert.stalled) {
    cert.status = SosStatus::kNotSos;
  } else {
    cert.status = SosStatus::kInconclusive;
  }
  return cert;
}

struct RankSearchOptions {
  double conv_tol = 1e-9;   // absolute feasibility gap on the input scale
  double rank_tol = 1e-8;   // relative eigenvalue cutoff for ranks and terms
  int max_iterations = 20000;  // per restart, per cap
  int restarts = 8;
  double sigma = 0.1;       // base spread of center-seeded restarts
  std::uint64_t seed = 42;
  CertifyOptions certify;   // forwarded to the certification step (seed overridden)
};

// One rank cap attempted during the search.
struct RankProbe {
  int cap = 0;
  int restarts_used = 0;
  bool converged = false;
  double best_gap = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

// Result of sos_rank_search. rank_upper is the rank of `gram`, the PSD Gram
// member found at the smallest feasible cap; rank_lower is only set when an
// exact combinatorial bound applies (squares-of-edges forms over C4-free
// graphs, where the two bounds meet). `decomposition` writes `gram` as a sum
// of squared bilinear forms with `residual` the largest coefficient error.
struct RankSearchResult {
  std::optional<int> rank_upper;
  std::optional<int> rank_lower;
  bool converged = false;
  SymMatrix gram{1};
  SosDecomposition decomposition;
  std::vector<RankProbe> probes;
  int iterations = 0;
  SosCertificate certificate;
};

// Sweeps rank caps from rank_min to rank_max, running a multi-restart
// alternating-projection feasibility probe at each cap and stopping at the
// first convergence. Restarts are seeded around the certification witness.
// Throws NotCertified unless certify_sos reports SOS, and InvalidRank unless
// 0 <= rank_min <= rank_max <= m*n.
inline RankSearchResult sos_rank_search(const BiquadraticForm& p, int rank_min, int rank_max,
                                        const RankSearchOptions& opts = {}) {
  const int mn = p.m() * p.n();
  if (rank_min < 0 || rank_max < rank_min || rank_max > mn)
    throw InvalidRank("sos_rank_search: need 0 <= rank_min <= rank_max <= m*n");

  RankSearchResult res;
  CertifyOptions copts = opts.certify;
  copts.seed = opts.seed;
  res.certificate = certify_sos(p, copts);
  if (res.certificate.status != SosStatus::kSos)
    throw NotCertified("sos_rank_search: form is not certified SOS");

  GramSpace space = make_gram_space(p);
  res.decomposition.m = p.m();
  res.decomposition.n = p.n();

  if (p.is_zero()) {
    res.rank_lower = 0;
    res.rank_upper = 0;
    res.converged = true;
    res.gram = space.natural;  // the zero matrix
    res.decomposition.residual = 0.0;
    return res;
  }

  // Exact combinatorial lower bound for squares-of-edges forms over C4-free
  // graphs: every decomposition needs one square per edge.
  if (is_simple_form(p)) {
    BipartiteGraph g = graph_from_simple_form(p);
    if (is_c4_free(g)) res.rank_lower = static_cast<int>(g.edges.size());
  }

  const double s = space.natural.frobenius_norm();
  GramSpace scaled = space;
  scaled.natural.scale(1.0 / s);
  const double tol = opts.conv_tol / s;

  std::vector<double> center(space.basis.size());
  for (std::size_t q = 0; q < center.size(); ++q) center[q] = res.certificate.gamma[q] / s;

  const auto record = [&res, s](const detail::ProbeRun& run, int cap) {
    RankProbe probe;
    probe.cap = cap;
    probe.restarts_used = run.restarts_used;
    probe.iterations = run.iterations;
    probe.converged = run.best.converged;
    probe.best_gap = run.best.best_gap * s;
    res.iterations += run.iterations;
    res.probes.push_back(probe);
  };
  std::vector<double> member_coords;

  for (int cap = rank_min; cap <= rank_max; ++cap) {
    detail::ProbeRun run = detail::capped_probe(
        scaled, &center, cap, tol, opts.max_iterations, opts.restarts, opts.sigma,
        opts.seed, 0x5141ULL * static_cast<std::uint64_t>(cap + 1));
    record(run, cap);
    if (run.best.converged) {
      SymMatrix x = gram_at(scaled, run.best.gamma);
      SymMatrix y = cap >= x.dim() ? psd_project(x) : psd_project_rank_capped(x, cap);
      member_coords = gram_coordinates(scaled, y);
      y.scale(s);
      res.gram = std::move(y);
      res.converged = true;
      break;
    }
  }

  // Downward refinement: probes seeded at the certification witness can miss
  // members of smaller rank that become reachable from the member just found,
  // so walk the cap down from its rank until a probe fails. Skipped when that
  // member sits exactly at the sweep center, which the sweep already covered.
  if (res.converged) {
    bool moved = false;
    for (std::size_t q = 0; q < center.size(); ++q)
      if (std::abs(member_coords[q] - center[q]) > 1e-12) {
        moved = true;
        break;
      }
    int cap = rank_eps(res.gram, opts.rank_tol) - 1;
    while (moved && cap >= rank_min) {
      detail::ProbeRun run = detail::capped_probe(
          scaled, &member_coords, cap, tol, opts.max_iterations, opts.restarts, opts.sigma,
          opts.seed, 0x9D00ULL + static_cast<std::uint64_t>(cap));
      record(run, cap);
      if (!run.best.converged) break;
      SymMatrix x = gram_at(scaled, run.best.gamma);
      SymMatrix y = psd_project_rank_capped(x, cap);
      member_coords = gram_coordinates(scaled, y);
      y.scale(s);
      res.gram = std::move(y);
      cap = rank_eps(res.gram, opts.rank_tol) - 1;
    }
  }

  if (res.converged) {
    res.decomposition = decomposition_from_psd_gram(res.gram, p.m(), p.n(), opts.rank_tol);
    res.decomposition.residual = verify_decomposition(p, res.decomposition);
    res.rank_upper = rank_eps(res.gram, opts.rank_tol);
  }
  return res;
}

}  // namespace biqrank
