#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "biqrank/errors.hpp"

namespace biqrank {

// Relative threshold for counting numerically nonzero eigenvalues.
inline constexpr double kEigTol = 1e-10;
// Jacobi sweep convergence: off-diagonal Frobenius norm vs. input norm.
inline constexpr double kJacobiTol = 1e-12;
inline constexpr int kMaxJacobiSweeps = 100;

// Dense symmetric matrix, row-major square storage.
// Mutators write both (r,c) and (c,r), so the invariant
// entries[(r,c)] == entries[(c,r)] holds exactly at all times.
class SymMatrix {
 public:
  explicit SymMatrix(int dim) : dim_(dim) {
    if (dim < 1) throw InvalidMatrix("SymMatrix: dimension must be positive");
    a_.assign(static_cast<size_t>(dim) * dim, 0.0);
  }

  // Builds from a full row-major square; symmetrizes as (A + A')/2.
  static SymMatrix from_rows(int dim, const std::vector<double>& entries) {
    SymMatrix m(dim);
    if (entries.size() != static_cast<size_t>(dim) * dim)
      throw InvalidMatrix("SymMatrix: entry count does not match dimension");
    for (double v : entries)
      if (!std::isfinite(v)) throw InvalidMatrix("SymMatrix: non-finite entry");
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c)
        m.a_[idx(dim, r, c)] =
            0.5 * (entries[idx(dim, r, c)] + entries[idx(dim, c, r)]);
    return m;
  }

  static SymMatrix diagonal(const std::vector<double>& d) {
    SymMatrix m(static_cast<int>(d.size()));
    for (int i = 0; i < m.dim_; ++i) m.a_[idx(m.dim_, i, i)] = d[i];
    return m;
  }

  static SymMatrix identity(int dim) {
    return diagonal(std::vector<double>(dim, 1.0));
  }

  int dim() const { return dim_; }

  double operator()(int r, int c) const {
    check_index(r);
    check_index(c);
    return a_[idx(dim_, r, c)];
  }

  void set(int r, int c, double v) {
    check_index(r);
    check_index(c);
    a_[idx(dim_, r, c)] = v;
    a_[idx(dim_, c, r)] = v;
  }

  void add(int r, int c, double v) {
    check_index(r);
    check_index(c);
    a_[idx(dim_, r, c)] += v;
    if (r != c) a_[idx(dim_, c, r)] += v;
  }

  void scale(double t) {
    for (double& v : a_) v *= t;
  }

  // this += t * other
  void add_scaled(const SymMatrix& other, double t) {
    if (other.dim_ != dim_) throw DimensionMismatch("SymMatrix: add_scaled");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] += t * other.a_[i];
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : a_) s += v * v;
    return std::sqrt(s);
  }

  const std::vector<double>& data() const { return a_; }

 private:
  static size_t idx(int dim, int r, int c) {
    return static_cast<size_t>(r) * dim + c;
  }
  void check_index(int i) const {
    if (i < 0 || i >= dim_) throw InvalidIndex("SymMatrix: index out of range");
  }

  int dim_;
  std::vector<double> a_;
};

inline double frobenius_inner(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("frobenius_inner");
  double s = 0.0;
  const auto& x = a.data();
  const auto& y = b.data();
  for (size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double frobenius_distance(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionMismatch("frobenius_distance");
  double s = 0.0;
  const auto& x = a.data();
  const auto& y = b.data();
  for (size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return std::sqrt(s);
}

struct EigenDecomposition {
  std::vector<double> values;                // descending
  std::vector<std::vector<double>> vectors;  // vectors[k] pairs with values[k]
  int sweeps = 0;
};

// Cyclic Jacobi eigensolver. Sweeps all (p, q) pairs in a fixed order and
// stops when the off-diagonal Frobenius norm drops below
// kJacobiTol * ||M||_F or after kMaxJacobiSweeps sweeps. The fixed sweep
// order makes results reproducible, including eigenvector signs and the
// ordering of equal eigenvalues.
inline EigenDecomposition eig_sym(const SymMatrix& M) {
  const int n = M.dim();
  std::vector<double> a(M.data());
  std::vector<double> v(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) v[static_cast<size_t>(i) * n + i] = 1.0;

  const double scale = M.frobenius_norm();
  const double conv = kJacobiTol * scale;
  auto at = [n](std::vector<double>& m, int r, int c) -> double& {
    return m[static_cast<size_t>(r) * n + c];
  };

  int sweeps = 0;
  while (sweeps < kMaxJacobiSweeps) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += 2.0 * at(a, p, q) * at(a, p, q);
    off = std::sqrt(off);
    if (off <= conv) break;
    ++sweeps;

    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = at(a, p, q);
        if (apq == 0.0) continue;
        const double app = at(a, p, p);
        const double aqq = at(a, q, q);
        const double theta = 0.5 * (aqq - app) / apq;
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;  // avoids overflow in theta^2
        } else {
          t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          if (theta < 0.0) t = -t;
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        at(a, p, p) = app - t * apq;
        at(a, q, q) = aqq + t * apq;
        at(a, p, q) = 0.0;
        at(a, q, p) = 0.0;
        for (int i = 0; i < n; ++i) {
          if (i == p || i == q) continue;
          const double aip = at(a, i, p);
          const double aiq = at(a, i, q);
          at(a, i, p) = aip - s * (aiq + tau * aip);
          at(a, p, i) = at(a, i, p);
          at(a, i, q) = aiq + s * (aip - tau * aiq);
          at(a, q, i) = at(a, i, q);
        }
        for (int i = 0; i < n; ++i) {
          const double vip = at(v, i, p);
          const double viq = at(v, i, q);
          at(v, i, p) = c * vip - s * viq;
          at(v, i, q) = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return at(a, x, x) > at(a, y, y);
  });

  EigenDecomposition out;
  out.sweeps = sweeps;
  out.values.resize(n);
  out.vectors.assign(n, std::vector<double>(n));
  for (int k = 0; k < n; ++k) {
    const int col = order[k];
    out.values[k] = at(a, col, col);
    for (int i = 0; i < n; ++i) out.vectors[k][i] = at(v, i, col);
  }
  return out;
}

// Rebuilds sum_k values[k] * u_k u_k' for the first `count` pairs.
inline SymMatrix reconstruct(const EigenDecomposition& e, int count) {
  const int n = static_cast<int>(e.vectors.size());
  SymMatrix m(n);
  count = std::min(count, n);
  for (int k = 0; k < count; ++k) {
    const double lam = e.values[k];
    if (lam == 0.0) continue;
    const auto& u = e.vectors[k];
    for (int r = 0; r < n; ++r)
      for (int c = r; c < n; ++c) m.add(r, c, lam * u[r] * u[c]);
  }
  return m;
}

// Nearest positive semidefinite matrix in Frobenius norm: negative
// eigenvalues are clamped to zero.
inline SymMatrix psd_project(const SymMatrix& M) {
  EigenDecomposition e = eig_sym(M);
  int keep = 0;
  for (double lam : e.values)
    if (lam > 0.0) ++keep;
  return reconstruct(e, keep);
}

// Nearest matrix that is both positive semidefinite and of rank at most
// max_rank: keep the max_rank largest eigenvalues, clamped at zero.
inline SymMatrix psd_project_rank_capped(const SymMatrix& M, int max_rank) {
  if (max_rank < 0) throw InvalidRank("psd_project_rank_capped: negative cap");
  EigenDecomposition e = eig_sym(M);
  const int n = M.dim();
  int keep = 0;
  for (int k = 0; k < std::min(max_rank, n); ++k)
    if (e.values[k] > 0.0) ++keep;
  return reconstruct(e, keep);
}

// Number of eigenvalues with |lambda| above tol * max(1, lambda_max).
inline int rank_eps(const SymMatrix& M, double tol = kEigTol) {
  if (tol < 0.0) throw InvalidMatrix("rank_eps: negative tolerance");
  EigenDecomposition e = eig_sym(M);
  const double thr = tol * std::max(1.0, e.values.empty() ? 0.0 : e.values[0]);
  int count = 0;
  for (double lam : e.values)
    if (std::abs(lam) > thr) ++count;
  return count;
}

// Solves A x = b for symmetric positive definite A by Cholesky factorization.
// Returns false (leaving x unspecified) when a pivot is not strictly
// positive, i.e. A is not numerically positive definite.
inline bool solve_spd(const SymMatrix& A, const std::vector<double>& b, std::vector<double>& x) {
  const int n = A.dim();
  if (static_cast<int>(b.size()) != n)
    throw DimensionMismatch("solve_spd: right-hand side length mismatch");
  std::vector<double> l(static_cast<std::size_t>(n) * n, 0.0);
  const auto at = [&l, n](int r, int c) -> double& {
    return l[static_cast<std::size_t>(r) * n + c];
  };
  for (int j = 0; j < n; ++j) {
    double diag = A(j, j);
    for (int k = 0; k < j; ++k) diag -= at(j, k) * at(j, k);
    if (!(diag > 0.0)) return false;
    const double root = std::sqrt(diag);
    at(j, j) = root;
    for (int i = j + 1; i < n; ++i) {
      double acc = A(i, j);
      for (int k = 0; k < j; ++k) acc -= at(i, k) * at(j, k);
      at(i, j) = acc / root;
    }
  }
  x = b;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < i; ++k) x[static_cast<std::size_t>(i)] -= at(i, k) * x[static_cast<std::size_t>(k)];
    x[static_cast<std::size_t>(i)] /= at(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    for (int k = i + 1; k < n; ++k) x[static_cast<std::size_t>(i)] -= at(k, i) * x[static_cast<std::size_t>(k)];
    x[static_cast<std::size_t>(i)] /= at(i, i);
  }
  return true;
}

}  // namespace biqrank
