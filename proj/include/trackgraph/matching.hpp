#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace trackgraph {

/// Weighted edge between row `prev` and column `next` of a bipartite graph.
struct Edge {
  std::size_t prev = 0;
  std::size_t next = 0;
  double weight = 0.0;

  bool operator==(const Edge&) const = default;
};

struct Matching {
  /// Sorted by prev index.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double total_weight = 0.0;
};

/// Maximum-total-weight one-to-one matching over the edges with
/// weight >= min_weight. Among equal-weight optima the result is the
/// lexicographically smallest pair list: rows are decided in ascending order,
/// each taking the smallest column that still admits an optimum, and a
/// matched row ranks before an unmatched one.
Matching max_weight_matching(std::size_t rows, std::size_t cols, std::span<const Edge> edges,
                             double min_weight);

/// Greedy baseline: repeatedly takes the heaviest remaining eligible edge
/// (ties by prev, then next).
Matching greedy_matching(std::span<const Edge> edges, double min_weight);

/// Throws Error if the matching is not one-to-one or uses a pair that is not
/// an edge of `edges`.
void validate_matching(std::span<const Edge> edges, const Matching& m);

}  // namespace trackgraph
