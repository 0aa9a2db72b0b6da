#include "trackgraph/graph_assoc.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <optional>

#include "detail/parallel.hpp"

namespace trackgraph {

GraphNode GraphNode::prev(TrackId id, const BoundingBox& box, FeaturePtr features) {
  return GraphNode{NodeSide::Prev, TrackRef{id}, box, std::move(features)};
}

GraphNode GraphNode::next(const Detection& det, FeaturePtr features) {
  return GraphNode{NodeSide::Next, DetectionRef{det.frame_index, det.det_index}, det.bbox,
                   std::move(features)};
}

std::string GraphNode::describe() const {
  if (const auto* t = std::get_if<TrackRef>(&ref)) {
    return "track " + std::to_string(t->track_id);
  }
  const auto& d = std::get<DetectionRef>(ref);
  return "frame " + std::to_string(d.frame_index) + " det " + std::to_string(d.det_index);
}

double motion_score(const BoundingBox& a, const BoundingBox& b) { return iou(a, b); }

namespace {

const FeatureBundle& require_features(const GraphNode& n, const TrackerConfig& cfg) {
  const char* what = nullptr;
  if (!n.features) {
    what = "no feature bundle";
  } else if (cfg.appearance_mode == AppearanceMode::SiftHist) {
    if (!n.features->histogram) what = "no histogram";
    else if (!n.features->descriptors) what = "no descriptors";
  } else if (cfg.appearance_mode == AppearanceMode::Deep && !n.features->deep_vector) {
    what = "no deep vector";
  }
  if (what) {
    throw Error(n.describe() + ": " + what + " for appearance mode " +
                std::string(to_string(cfg.appearance_mode)));
  }
  return *n.features;
}

}  // namespace

double edge_weight(const GraphNode& prev, const GraphNode& next, const TrackerConfig& cfg,
                   const PcaBasis* basis) {
  const double motion = motion_score(prev.bbox, next.bbox);
  switch (cfg.appearance_mode) {
    case AppearanceMode::None:
      return cfg.alpha * motion;
    case AppearanceMode::SiftHist: {
      const auto& a = require_features(prev, cfg);
      const auto& b = require_features(next, cfg);
      return cfg.alpha * motion + cfg.beta * appearance_sift(a, b, cfg);
    }
    case AppearanceMode::Deep: {
      if (!basis) throw Error("edge_weight: deep appearance requires a PCA basis");
      const auto& a = require_features(prev, cfg);
      const auto& b = require_features(next, cfg);
      return cfg.alpha * motion + cfg.beta * appearance_deep(a, b, *basis).score;
    }
  }
  return 0.0;
}

AssociationGraph build_graph(std::vector<GraphNode> prev, std::vector<GraphNode> next,
                             const TrackerConfig& cfg, const PcaBasis* basis) {
  AssociationGraph g;
  g.prev_nodes = std::move(prev);
  g.next_nodes = std::move(next);
  const std::size_t np = g.prev_nodes.size();
  const std::size_t nn = g.next_nodes.size();

  // Pass 1: prune by IOU, one row per prev node.
  std::vector<std::vector<std::size_t>> candidates(np);
  detail::parallel_for(np, cfg.policy, [&](std::size_t i) {
    for (std::size_t j = 0; j < nn; ++j) {
      if (iou(g.prev_nodes[i].bbox, g.next_nodes[j].bbox) > cfg.iou_prune_threshold) {
        candidates[i].push_back(j);
      }
    }
  });

  // Deep mode: project every node touching a candidate edge exactly once.
  std::vector<std::optional<std::vector<double>>> prev_proj(np), next_proj(nn);
  if (cfg.appearance_mode == AppearanceMode::Deep) {
    if (!basis) throw Error("build_graph: deep appearance requires a PCA basis");
    std::vector<char> next_used(nn, 0);
    std::vector<std::span<const double>> inputs;
    std::vector<std::pair<bool, std::size_t>> owners;
    for (std::size_t i = 0; i < np; ++i) {
      if (candidates[i].empty()) continue;
      inputs.emplace_back(*require_features(g.prev_nodes[i], cfg).deep_vector);
      owners.emplace_back(true, i);
      for (std::size_t j : candidates[i]) next_used[j] = 1;
    }
    for (std::size_t j = 0; j < nn; ++j) {
      if (!next_used[j]) continue;
      inputs.emplace_back(*require_features(g.next_nodes[j], cfg).deep_vector);
      owners.emplace_back(false, j);
    }
    auto projected = pca_project_all(inputs, *basis, cfg.policy);
    for (std::size_t k = 0; k < owners.size(); ++k) {
      auto& slot = owners[k].first ? prev_proj[owners[k].second] : next_proj[owners[k].second];
      slot = std::move(projected[k]);
    }
  }

  // Pass 2: weights.
  std::vector<std::vector<Edge>> rows(np);
  detail::parallel_for(np, cfg.policy, [&](std::size_t i) {
    for (std::size_t j : candidates[i]) {
      double w;
      if (cfg.appearance_mode == AppearanceMode::Deep) {
        const double motion = motion_score(g.prev_nodes[i].bbox, g.next_nodes[j].bbox);
        w = cfg.alpha * motion +
            cfg.beta * deep_similarity_projected(*prev_proj[i], *next_proj[j]).score;
      } else {
        w = edge_weight(g.prev_nodes[i], g.next_nodes[j], cfg, basis);
      }
      rows[i].push_back(Edge{i, j, w});
    }
  });
  for (auto& r : rows) g.edges.insert(g.edges.end(), r.begin(), r.end());
  return g;
}

std::vector<Component> connected_components(const AssociationGraph& g) {
  const std::size_t np = g.prev_nodes.size();
  const std::size_t nn = g.next_nodes.size();
  // Union-find over prev nodes [0, np) followed by next nodes [np, np + nn).
  std::vector<std::size_t> parent(np + nn);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& e : g.edges) {
    const std::size_t a = find(e.prev);
    const std::size_t b = find(np + e.next);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }

  std::vector<std::size_t> slot(np + nn, std::numeric_limits<std::size_t>::max());
  std::vector<Component> comps;
  auto component_of = [&](std::size_t node) -> Component& {
    const std::size_t root = find(node);
    if (slot[root] == std::numeric_limits<std::size_t>::max()) {
      slot[root] = comps.size();
      comps.emplace_back();
    }
    return comps[slot[root]];
  };
  std::vector<std::size_t> local(np + nn, 0);
  for (std::size_t i = 0; i < np; ++i) {
    auto& c = component_of(i);
    local[i] = c.prev_index.size();
    c.prev_index.push_back(i);
    c.graph.prev_nodes.push_back(g.prev_nodes[i]);
  }
  for (std::size_t j = 0; j < nn; ++j) {
    auto& c = component_of(np + j);
    local[np + j] = c.next_index.size();
    c.next_index.push_back(j);
    c.graph.next_nodes.push_back(g.next_nodes[j]);
  }
  for (const auto& e : g.edges) {
    auto& c = comps[slot[find(e.prev)]];
    c.graph.edges.push_back(Edge{local[e.prev], local[np + e.next], e.weight});
  }

  constexpr auto none = std::numeric_limits<std::size_t>::max();
  std::stable_sort(comps.begin(), comps.end(), [&](const Component& a, const Component& b) {
    const auto ka = std::make_pair(a.prev_index.empty() ? none : a.prev_index.front(),
                                   a.next_index.empty() ? none : a.next_index.front());
    const auto kb = std::make_pair(b.prev_index.empty() ? none : b.prev_index.front(),
                                   b.next_index.empty() ? none : b.next_index.front());
    return ka < kb;
  });
  return comps;
}

Matching solve_component(const AssociationGraph& c, double min_weight, MatchSolver solver) {
  Matching m = solver == MatchSolver::Greedy
                   ? greedy_matching(c.edges, min_weight)
                   : max_weight_matching(c.prev_nodes.size(), c.next_nodes.size(), c.edges,
                                         min_weight);
#ifdef TRACKGRAPH_CHECKS
  validate_matching(c.edges, m);
#endif
  return m;
}

std::vector<Matching> solve_components(const std::vector<Component>& components,
                                       double min_weight, MatchSolver solver,
                                       ExecutionPolicy policy) {
  std::vector<Matching> out(components.size());
  detail::parallel_for(components.size(), policy, [&](std::size_t i) {
    if (components[i].graph.edges.empty()) return;
    out[i] = solve_component(components[i].graph, min_weight, solver);
  });
  return out;
}

Matching associate(const AssociationGraph& g, const TrackerConfig& cfg) {
  const auto comps = connected_components(g);
  const auto solved = solve_components(comps, cfg.min_match_weight, cfg.solver, cfg.policy);
  Matching merged;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    for (const auto& [p, n] : solved[c].pairs) {
      merged.pairs.emplace_back(comps[c].prev_index[p], comps[c].next_index[n]);
    }
    merged.total_weight += solved[c].total_weight;
  }
  std::sort(merged.pairs.begin(), merged.pairs.end());
#ifdef TRACKGRAPH_CHECKS
  validate_matching(g.edges, merged);
#endif
  return merged;
}

}  // namespace trackgraph
