#include "trackgraph/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "trackgraph/core_model.hpp"

namespace trackgraph {

namespace {

// Minimum-cost assignment on a square n x n matrix (Hungarian method with
// potentials).
struct Assignment {
  double cost = 0.0;
  /// Column assigned to each row.
  std::vector<std::size_t> col_of;
  /// Optimal dual: cost(i, j) - u[i] - v[j] >= 0, zero on assigned cells.
  std::vector<double> u, v;
};

Assignment hungarian(const std::vector<double>& cost, std::size_t n) {
  Assignment out;
  if (n == 0) return out;
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  out.col_of.assign(n, 0);
  for (std::size_t j = 1; j <= n; ++j) {
    out.col_of[p[j] - 1] = j - 1;
    out.cost += cost[(p[j] - 1) * n + (j - 1)];
  }
  out.u.assign(u.begin() + 1, u.end());
  out.v.assign(v.begin() + 1, v.end());
  return out;
}

using WeightMap = std::map<std::pair<std::size_t, std::size_t>, double>;
constexpr std::size_t kUnmatched = std::numeric_limits<std::size_t>::max();

struct SubSolution {
  double weight = 0.0;
  /// Parallel to the `rows` argument; a column or kUnmatched.
  std::vector<std::size_t> col_of;
  std::vector<double> u, v;
};

// Best matching using only the given rows and columns.
SubSolution solve_subset(const std::vector<std::size_t>& rows,
                         const std::vector<std::size_t>& cols, const WeightMap& weight) {
  SubSolution out;
  out.col_of.assign(rows.size(), kUnmatched);
  if (rows.empty() || cols.empty()) return out;
  const std::size_t n = std::max(rows.size(), cols.size());
  std::vector<double> cost(n * n, 0.0);
  std::vector<char> is_edge(n * n, 0);
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = 0; b < cols.size(); ++b) {
      auto it = weight.find({rows[a], cols[b]});
      if (it != weight.end()) {
        cost[a * n + b] = -it->second;
        is_edge[a * n + b] = 1;
      }
    }
  }
  const Assignment asg = hungarian(cost, n);
  out.weight = -asg.cost;
  for (std::size_t a = 0; a < rows.size(); ++a) {
    const std::size_t b = asg.col_of[a];
    if (b < cols.size() && is_edge[a * n + b]) out.col_of[a] = cols[b];
  }
  out.u = asg.u;
  out.v = asg.v;
  return out;
}

}  // namespace

Matching max_weight_matching(std::size_t rows, std::size_t cols, std::span<const Edge> edges,
                             double min_weight) {
  // Eligible edges; a duplicate (prev, next) keeps its heaviest weight.
  WeightMap weight;
  std::vector<std::vector<std::pair<std::size_t, double>>> by_row(rows);
  for (const auto& e : edges) {
    if (e.prev >= rows || e.next >= cols) {
      throw Error("max_weight_matching: edge endpoint out of range");
    }
    if (!(e.weight >= min_weight)) continue;
    auto [it, inserted] = weight.emplace(std::make_pair(e.prev, e.next), e.weight);
    if (!inserted) it->second = std::max(it->second, e.weight);
  }
  for (const auto& [key, w] : weight) by_row[key.first].emplace_back(key.second, w);

  Matching out;
  if (weight.empty()) return out;

  std::vector<std::size_t> all_rows(rows), free_cols(cols);
  for (std::size_t i = 0; i < rows; ++i) all_rows[i] = i;
  for (std::size_t j = 0; j < cols; ++j) free_cols[j] = j;

  const SubSolution global = solve_subset(all_rows, free_cols, weight);
  const double best = global.weight;
  double scale = 1.0;
  for (const auto& [key, w] : weight) scale = std::max(scale, std::abs(w));
  const double eps = 1e-11 * std::max(1.0, std::abs(best));
  const double tight_tol = 1e-9 * scale;
  // An edge outside the tight set of an optimal dual lies in no optimum.
  auto tight = [&](std::size_t r, std::size_t c, double w) {
    return std::abs(-w - global.u[r] - global.v[c]) <= tight_tol;
  };

  // `current` is an optimal completion of the rows not yet decided.
  std::vector<std::size_t> current = global.col_of;
  double fixed = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (by_row[r].empty()) continue;
    std::vector<std::size_t> later_rows(all_rows.begin() + static_cast<std::ptrdiff_t>(r + 1),
                                        all_rows.end());
    for (const auto& [c, w] : by_row[r]) {  // ascending column order
      auto it = std::find(free_cols.begin(), free_cols.end(), c);
      if (it == free_cols.end()) continue;
      if (current[r] != c) {
        if (!tight(r, c, w)) continue;
        std::vector<std::size_t> rest(free_cols);
        rest.erase(rest.begin() + (it - free_cols.begin()));
        const SubSolution sub = solve_subset(later_rows, rest, weight);
        if (fixed + w + sub.weight < best - eps) continue;
        for (std::size_t k = 0; k < later_rows.size(); ++k) current[later_rows[k]] = sub.col_of[k];
      }
      out.pairs.emplace_back(r, c);
      out.total_weight += w;
      fixed += w;
      free_cols.erase(std::find(free_cols.begin(), free_cols.end(), c));
      current[r] = c;
      break;
    }
  }
  return out;
}

Matching greedy_matching(std::span<const Edge> edges, double min_weight) {
  std::vector<Edge> sorted;
  for (const auto& e : edges) {
    if (e.weight >= min_weight) sorted.push_back(e);
  }
  std::sort(sorted.begin(), sorted.end(), [](const Edge& a, const Edge& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    if (a.prev != b.prev) return a.prev < b.prev;
    return a.next < b.next;
  });
  std::set<std::size_t> used_prev, used_next;
  Matching out;
  for (const auto& e : sorted) {
    if (used_prev.count(e.prev) || used_next.count(e.next)) continue;
    used_prev.insert(e.prev);
    used_next.insert(e.next);
    out.pairs.emplace_back(e.prev, e.next);
    out.total_weight += e.weight;
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  return out;
}

void validate_matching(std::span<const Edge> edges, const Matching& m) {
  std::set<std::size_t> seen_prev, seen_next;
  for (const auto& [p, n] : m.pairs) {
    if (!seen_prev.insert(p).second) throw Error("matching: prev node used twice");
    if (!seen_next.insert(n).second) throw Error("matching: next node used twice");
    const bool is_edge = std::any_of(edges.begin(), edges.end(),
                                     [&](const Edge& e) { return e.prev == p && e.next == n; });
    if (!is_edge) throw Error("matching: pair is not an edge of the graph");
  }
}

}  // namespace trackgraph
