#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "biqrank/errors.hpp"

namespace biqrank {

// Bipartite graph on parts {1..m} x {1..n}; edges are 1-based, kept sorted.
struct BipartiteGraph {
  int m = 0;
  int n = 0;
  std::vector<std::pair<int, int>> edges;
};

inline BipartiteGraph make_graph(int m, int n,
                                 std::vector<std::pair<int, int>> edges) {
  if (m < 1 || n < 1) throw InvalidIndex("make_graph: sides must be positive");
  for (const auto& [i, j] : edges)
    if (i < 1 || i > m || j < 1 || j > n)
      throw InvalidIndex("make_graph: edge endpoint out of range");
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw InvalidIndex("make_graph: duplicate edge");
  return BipartiteGraph{m, n, std::move(edges)};
}

// True when no two left vertices share two common neighbors, i.e. the graph
// contains no quadrilateral.
inline bool is_c4_free(const BipartiteGraph& g) {
  const int words = (g.n + 63) / 64;
  std::vector<std::uint64_t> nbr(static_cast<size_t>(g.m) * words, 0);
  for (const auto& [i, j] : g.edges) {
    const int col = j - 1;
    nbr[static_cast<size_t>(i - 1) * words + col / 64] |=
        std::uint64_t{1} << (col % 64);
  }
  for (int a = 0; a < g.m; ++a) {
    for (int b = a + 1; b < g.m; ++b) {
      int common = 0;
      for (int w = 0; w < words; ++w)
        common += std::popcount(nbr[static_cast<size_t>(a) * words + w] &
                                nbr[static_cast<size_t>(b) * words + w]);
      if (common >= 2) return false;
    }
  }
  return true;
}

// Upper bound on the number of edges of a C4-free subgraph of K_{m,n}.
inline double reiman_bound(int m, int n) {
  if (m < 1 || n < 1) throw InvalidIndex("reiman_bound: sides must be positive");
  const double dn = n;
  const double dm = m;
  return dn / 2.0 + 0.5 * std::sqrt(dn * dn + 4.0 * dm * dn * (dm - 1.0)) + 1.0;
}

// Table of exactly known maximum edge counts for small sides.
inline std::optional<int> known_z(int m, int n) {
  const int a = std::min(m, n);
  const int b = std::max(m, n);
  struct Row {
    int a, b, z;
  };
  static constexpr Row kTable[] = {
      {2, 2, 3}, {3, 3, 6}, {3, 4, 7}, {4, 4, 9},
      {4, 5, 10}, {4, 6, 12}, {5, 5, 12},
  };
  for (const Row& row : kTable)
    if (row.a == a && row.b == b) return row.z;
  return std::nullopt;
}

// A maximum C4-free bipartite graph on 4 x 3 with 7 edges, used as a fixed
// instance in tests and demos. Left degrees are (2, 2, 1, 2).
inline BipartiteGraph max_c4free_graph_4x3() {
  return make_graph(4, 3,
                    {{1, 1}, {2, 1}, {3, 1}, {1, 2}, {4, 2}, {2, 3}, {4, 3}});
}

struct ZarankiewiczOptions {
  int limit = 7;               // maximum accepted side length (hard cap 8)
  int jobs = 1;                // worker threads
  bool symmetry_break = false; // restrict to non-increasing left degrees
};

struct ZarankiewiczResult {
  int m = 0;
  int n = 0;
  int z = 0;
  BipartiteGraph witness;
  std::uint64_t nodes = 0;  // deterministic only for jobs == 1
  double elapsed_ms = 0.0;
};

namespace detail {

// Column pairs are tracked in a 64-bit mask with bit c1*8+c2 for c1 < c2,
// which caps the right side at 8 columns.
inline constexpr int kMaxColumns = 8;

struct ZState {
  std::uint64_t pair_used = 0;
  std::vector<std::uint32_t> row_mask;
  std::vector<std::pair<int, int>> edges;

  explicit ZState(int m) : row_mask(m, 0) {}
};

class ZSearch {
 public:
  ZSearch(int m, int n, bool symmetry_break,
          const std::atomic<int>* global_best)
      : m_(m), n_(n), symmetry_(symmetry_break), global_best_(global_best) {}

  // Explores every completion of `state`, whose next undecided cell is
  // `cell` in row-major order, include-branch first.
  void run(ZState& state, int cell) { dfs(state, cell); }

  int best() const { return best_; }
  const std::vector<std::pair<int, int>>& best_edges() const {
    return best_edges_;
  }
  std::uint64_t nodes() const { return nodes_; }

 private:
  // Max extra edges that the remaining cells could contribute: every new
  // edge in a row of degree d consumes d column pairs, each column pair is
  // consumed at most once, so edges are bought greedily by pair cost until
  // the remaining budget runs out. A relaxation, hence a valid bound.
  int bound(const ZState& s, int r, int c) const {
    int budget = n_ * (n_ - 1) / 2 - std::popcount(s.pair_used);
    const int d0 = std::popcount(s.row_mask[r]);
    const int rem0 = n_ - c;
    const int full_rows = m_ - r - 1;
    int extra = 0;
    const int lmax = std::max(n_, d0 + rem0);
    for (int cost = 0; cost < lmax; ++cost) {
      int avail = (cost < n_) ? full_rows : 0;
      if (cost >= d0 && cost < d0 + rem0) ++avail;
      if (avail == 0) continue;
      if (cost == 0) {
        extra += avail;
        continue;
      }
      const int take = std::min(avail, budget / cost);
      extra += take;
      budget -= take * cost;
      if (take < avail) break;
    }
    return extra;
  }

  void dfs(ZState& s, int cell) {
    ++nodes_;
    const int count = static_cast<int>(s.edges.size());
    if (cell == m_ * n_) {
      if (count > best_) {
        best_ = count;
        best_edges_ = s.edges;
      }
      return;
    }
    const int r = cell / n_;
    const int c = cell % n_;
    const int reach = count + bound(s, r, c);
    if (reach <= best_) return;
    if (global_best_ && reach < global_best_->load(std::memory_order_relaxed))
      return;

    const std::uint32_t rm = s.row_mask[r];
    bool can_include = true;
    if (symmetry_ && r > 0 &&
        std::popcount(rm) + 1 > std::popcount(s.row_mask[r - 1]))
      can_include = false;
    std::uint64_t new_pairs = 0;
    if (can_include) {
      for (int c1 = 0; c1 < c; ++c1)
        if (rm & (std::uint32_t{1} << c1))
          new_pairs |= std::uint64_t{1} << (c1 * kMaxColumns + c);
      if (s.pair_used & new_pairs) can_include = false;
    }
    if (can_include) {
      s.pair_used |= new_pairs;
      s.row_mask[r] = rm | (std::uint32_t{1} << c);
      s.edges.emplace_back(r + 1, c + 1);
      dfs(s, cell + 1);
      s.edges.pop_back();
      s.row_mask[r] = rm;
      s.pair_used &= ~new_pairs;
    }
    dfs(s, cell + 1);
  }

  int m_;
  int n_;
  bool symmetry_;
  const std::atomic<int>* global_best_;
  int best_ = -1;
  std::vector<std::pair<int, int>> best_edges_;
  std::uint64_t nodes_ = 0;
};

// Enumerates all pair-feasible assignments of the first `depth` cells in
// exploration order (include branch first), one task per assignment.
inline void enumerate_tasks(int m, int n, bool symmetry_break, int depth,
                            ZState state, int cell,
                            std::vector<ZState>& out) {
  if (cell == depth) {
    out.push_back(state);
    return;
  }
  const int r = cell / n;
  const int c = cell % n;
  const std::uint32_t rm = state.row_mask[r];
  bool can_include = true;
  if (symmetry_break && r > 0 &&
      std::popcount(rm) + 1 > std::popcount(state.row_mask[r - 1]))
    can_include = false;
  std::uint64_t new_pairs = 0;
  if (can_include) {
    for (int c1 = 0; c1 < c; ++c1)
      if (rm & (std::uint32_t{1} << c1))
        new_pairs |= std::uint64_t{1} << (c1 * kMaxColumns + c);
    if (state.pair_used & new_pairs) can_include = false;
  }
  if (can_include) {
    ZState inc = state;
    inc.pair_used |= new_pairs;
    inc.row_mask[r] = rm | (std::uint32_t{1} << c);
    inc.edges.emplace_back(r + 1, c + 1);
    enumerate_tasks(m, n, symmetry_break, depth, std::move(inc), cell + 1, out);
  }
  enumerate_tasks(m, n, symmetry_break, depth, std::move(state), cell + 1, out);
}

}  // namespace detail

// Maximum number of edges of a C4-free subgraph of K_{m,n}, found by
// exhaustive branch-and-bound over cells in row-major order. The witness is
// the lexicographically smallest maximum edge set under that order (with
// symmetry breaking off); it is identical for any jobs value.
inline ZarankiewiczResult zarankiewicz(int m, int n,
                                       const ZarankiewiczOptions& opts = {}) {
  if (m < 1 || n < 1 || m > opts.limit || n > opts.limit)
    throw SizeLimit("zarankiewicz: side outside [1, limit]");
  if (n > detail::kMaxColumns)
    throw SizeLimit("zarankiewicz: right side exceeds bitmask capacity (8)");
  const auto started = std::chrono::steady_clock::now();

  ZarankiewiczResult result;
  result.m = m;
  result.n = n;

  const int cells = m * n;
  const int jobs = std::max(1, opts.jobs);
  if (jobs == 1) {
    detail::ZSearch search(m, n, opts.symmetry_break, nullptr);
    detail::ZState root(m);
    search.run(root, 0);
    result.z = search.best();
    result.witness = make_graph(m, n, search.best_edges());
    result.nodes = search.nodes();
  } else {
    const int depth = std::min(cells, 10);
    std::vector<detail::ZState> tasks;
    detail::enumerate_tasks(m, n, opts.symmetry_break, depth,
                            detail::ZState(m), 0, tasks);
    std::vector<int> values(tasks.size(), -1);
    std::vector<std::vector<std::pair<int, int>>> witnesses(tasks.size());
    std::atomic<int> global_best{-1};
    std::atomic<size_t> cursor{0};
    std::atomic<std::uint64_t> nodes{0};
    auto worker = [&]() {
      for (;;) {
        const size_t t = cursor.fetch_add(1);
        if (t >= tasks.size()) break;
        detail::ZSearch search(m, n, opts.symmetry_break, &global_best);
        detail::ZState state = tasks[t];
        search.run(state, depth);
        values[t] = search.best();
        witnesses[t] = search.best_edges();
        nodes.fetch_add(search.nodes());
        int seen = global_best.load();
        while (search.best() > seen &&
               !global_best.compare_exchange_weak(seen, search.best())) {
        }
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
    // Earliest task wins ties, matching the sequential first-found witness.
    int best = -1;
    size_t best_task = 0;
    for (size_t t = 0; t < tasks.size(); ++t) {
      if (values[t] > best) {
        best = values[t];
        best_task = t;
      }
    }
    result.z = best;
    result.witness = make_graph(m, n, witnesses[best_task]);
    result.nodes = nodes.load();
  }

  result.elapsed_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - started)
                          .count();
  return result;
}

}  // namespace biqrank
