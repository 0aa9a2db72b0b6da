#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "trackgraph/appearance.hpp"
#include "trackgraph/core_model.hpp"
#include "trackgraph/matching.hpp"

namespace trackgraph {

enum class NodeSide { Prev, Next };

struct TrackRef {
  TrackId track_id = 0;
};

struct DetectionRef {
  int frame_index = 0;
  int det_index = 0;
};

/// One node of the frame-to-frame graph. Prev nodes are active tracks at
/// their current (observed or hypothetical) box; next nodes are detections.
struct GraphNode {
  NodeSide side = NodeSide::Prev;
  std::variant<TrackRef, DetectionRef> ref;
  BoundingBox bbox;
  FeaturePtr features;

  static GraphNode prev(TrackId id, const BoundingBox& box, FeaturePtr features);
  static GraphNode next(const Detection& det, FeaturePtr features);

  /// "track 4" or "frame 12 det 3", for error messages.
  std::string describe() const;
};

struct AssociationGraph {
  std::vector<GraphNode> prev_nodes;
  std::vector<GraphNode> next_nodes;
  /// Sorted by (prev, next).
  std::vector<Edge> edges;
};

/// A connected piece of a graph. `prev_index` / `next_index` map the local
/// node positions back to the parent graph.
struct Component {
  AssociationGraph graph;
  std::vector<std::size_t> prev_index;
  std::vector<std::size_t> next_index;
};

/// Motion affinity between consecutive positions: their IOU.
double motion_score(const BoundingBox& a, const BoundingBox& b);

/// alpha * motion + beta * appearance, appearance chosen by the config's
/// mode. `basis` is required in Deep mode.
double edge_weight(const GraphNode& prev, const GraphNode& next, const TrackerConfig& cfg,
                   const PcaBasis* basis);

/// Keeps exactly the pairs with IOU above the prune threshold, each weighted
/// by edge_weight. Runs row-parallel when cfg.policy is Parallel.
AssociationGraph build_graph(std::vector<GraphNode> prev, std::vector<GraphNode> next,
                             const TrackerConfig& cfg, const PcaBasis* basis);

/// Maximal connected subgraphs, isolated nodes as singletons, ordered by
/// smallest prev index then smallest next index.
std::vector<Component> connected_components(const AssociationGraph& g);

Matching solve_component(const AssociationGraph& c, double min_weight,
                         MatchSolver solver = MatchSolver::Exact);

/// Solves each component independently (concurrently in Parallel mode).
std::vector<Matching> solve_components(const std::vector<Component>& components,
                                       double min_weight, MatchSolver solver,
                                       ExecutionPolicy policy);

/// Full association step: split, solve, merge back to global indices.
Matching associate(const AssociationGraph& g, const TrackerConfig& cfg);

}  // namespace trackgraph
