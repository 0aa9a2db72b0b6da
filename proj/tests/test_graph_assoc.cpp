#include <algorithm>
#include <memory>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "trackgraph/graph_assoc.hpp"

using namespace trackgraph;

namespace {

Detection det(int idx, const BoundingBox& b) { return {2, idx, b, 1.0}; }

std::vector<BoundingBox> random_boxes(std::mt19937_64& rng, std::size_t n, double spread) {
  std::uniform_real_distribution<double> pos(0.0, spread);
  std::uniform_real_distribution<double> size(20.0, 40.0);
  std::vector<BoundingBox> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({pos(rng), pos(rng), size(rng), size(rng)});
  return out;
}

FeaturePtr deep_features(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  FeatureBundle f;
  f.deep_vector = std::vector<double>(dim);
  for (double& x : *f.deep_vector) x = g(rng);
  return std::make_shared<const FeatureBundle>(std::move(f));
}

struct RandomScene {
  std::vector<GraphNode> prev, next;
};

// Next boxes are jittered copies of prev boxes plus some newcomers, so the
// graph has a mix of edges and isolated nodes.
RandomScene random_scene(std::mt19937_64& rng, std::size_t np, std::size_t nn, bool deep) {
  RandomScene s;
  const auto pb = random_boxes(rng, np, 200.0);
  std::normal_distribution<double> jitter(0.0, 2.0);
  for (std::size_t i = 0; i < np; ++i)
    s.prev.push_back(GraphNode::prev(static_cast<TrackId>(i + 1), pb[i],
                                     deep ? deep_features(rng, 12) : nullptr));
  const auto extra = random_boxes(rng, nn, 200.0);
  for (std::size_t j = 0; j < nn; ++j) {
    BoundingBox b = extra[j];
    if (j < np && rng() % 4 != 0) {
      b = pb[j];
      b.x += jitter(rng);
      b.y += jitter(rng);
    }
    s.next.push_back(GraphNode::next(det(static_cast<int>(j), b),
                                     deep ? deep_features(rng, 12) : nullptr));
  }
  return s;
}

// Plain interval arithmetic, kept separate from the library's iou().
double overlap_ratio(const BoundingBox& a, const BoundingBox& b) {
  const double w = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double h = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  if (w <= 0 || h <= 0) return 0.0;
  const double inter = w * h;
  return inter / (a.w * a.h + b.w * b.h - inter);
}

TrackerConfig motion_only(double threshold = 0.6) {
  TrackerConfig cfg;
  cfg.appearance_mode = AppearanceMode::None;
  cfg.alpha = 1.0;
  cfg.beta = 0.0;
  cfg.iou_prune_threshold = threshold;
  return cfg;
}

std::set<std::pair<std::size_t, std::size_t>> edge_set(const AssociationGraph& g) {
  std::set<std::pair<std::size_t, std::size_t>> out;
  for (const auto& e : g.edges) out.emplace(e.prev, e.next);
  return out;
}

}  // namespace

TEST(MotionScore, Examples) {
  EXPECT_EQ(motion_score({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
  EXPECT_EQ(motion_score({0, 0, 10, 10}, {50, 50, 10, 10}), 0.0);
  EXPECT_NEAR(motion_score({0, 0, 10, 10}, {5, 0, 10, 10}),
              oracle::raster_iou({0, 0, 10, 10}, {5, 0, 10, 10}), 1e-12);
}

TEST(EdgeWeight, MotionOnly) {
  auto cfg = motion_only();
  const auto p = GraphNode::prev(1, {0, 0, 10, 10}, nullptr);
  const auto n = GraphNode::next(det(0, {0, 0, 5, 10}), nullptr);  // IOU 0.5
  EXPECT_NEAR(edge_weight(p, n, cfg, nullptr), 0.5, 1e-12);
}

TEST(EdgeWeight, AppearanceOnlyAndBlend) {
  PcaBasis basis;
  basis.mean = {0, 0};
  basis.components = {{1, 0}, {0, 1}};
  basis.variances = {1, 1};
  FeatureBundle fa, fb;
  fa.deep_vector = std::vector<double>{1, 0};
  fb.deep_vector = std::vector<double>{0.8, 0.6};  // cosine 0.8
  auto pa = std::make_shared<const FeatureBundle>(fa);
  auto pb = std::make_shared<const FeatureBundle>(fb);

  TrackerConfig cfg;
  cfg.appearance_mode = AppearanceMode::Deep;
  cfg.alpha = 0.0;
  cfg.beta = 1.0;
  const auto p = GraphNode::prev(1, {0, 0, 10, 10}, pa);
  const auto far = GraphNode::next(det(0, {100, 100, 10, 10}), pb);
  EXPECT_NEAR(edge_weight(p, far, cfg, &basis), 0.8, 1e-12);

  cfg.alpha = cfg.beta = 0.5;
  const auto near = GraphNode::next(det(1, {0, 0, 10, 6}), pb);  // IOU 0.6
  EXPECT_NEAR(edge_weight(p, near, cfg, &basis), 0.7, 1e-12);
}

TEST(EdgeWeight, MissingFeaturesNameTheNode) {
  TrackerConfig cfg;  // SiftHist
  const auto p = GraphNode::prev(4, {0, 0, 10, 10}, nullptr);
  const auto n = GraphNode::next(det(3, {0, 0, 10, 10}), nullptr);
  try {
    edge_weight(p, n, cfg, nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("track 4"), std::string::npos);
  }
}

TEST(BuildGraph, EmptyNextFrame) {
  std::vector<GraphNode> prev{GraphNode::prev(1, {0, 0, 10, 10}, nullptr)};
  const auto g = build_graph(prev, {}, motion_only(), nullptr);
  EXPECT_EQ(g.prev_nodes.size(), 1u);
  EXPECT_TRUE(g.edges.empty());
}

TEST(BuildGraph, OneIdenticalPair) {
  std::vector<GraphNode> prev{GraphNode::prev(1, {0, 0, 10, 10}, nullptr),
                              GraphNode::prev(2, {300, 300, 10, 10}, nullptr)};
  std::vector<GraphNode> next{GraphNode::next(det(0, {600, 0, 10, 10}), nullptr),
                              GraphNode::next(det(1, {0, 0, 10, 10}), nullptr)};
  const auto g = build_graph(prev, next, motion_only(), nullptr);
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.edges[0], (Edge{0, 1, 1.0}));
}

TEST(BuildGraph, EdgeSetMatchesAllPairsFilter) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 200; ++t) {
    auto scene = random_scene(rng, 5, 5, false);
    const auto cfg = motion_only();
    const auto g = build_graph(scene.prev, scene.next, cfg, nullptr);
    std::set<std::pair<std::size_t, std::size_t>> expected;
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j)
        if (overlap_ratio(scene.prev[i].bbox, scene.next[j].bbox) > 0.6)
          expected.emplace(i, j);
    ASSERT_EQ(edge_set(g), expected);
    ASSERT_TRUE(std::is_sorted(g.edges.begin(), g.edges.end(), [](const Edge& a, const Edge& b) {
      return std::tie(a.prev, a.next) < std::tie(b.prev, b.next);
    }));
  }
}

TEST(BuildGraph, PruningIsMonotone) {
  std::mt19937_64 rng(41);
  for (int t = 0; t < 200; ++t) {
    auto scene = random_scene(rng, 8, 8, false);
    const auto e3 = edge_set(build_graph(scene.prev, scene.next, motion_only(0.3), nullptr));
    const auto e6 = edge_set(build_graph(scene.prev, scene.next, motion_only(0.6), nullptr));
    const auto e9 = edge_set(build_graph(scene.prev, scene.next, motion_only(0.9), nullptr));
    ASSERT_TRUE(std::includes(e3.begin(), e3.end(), e6.begin(), e6.end()));
    ASSERT_TRUE(std::includes(e6.begin(), e6.end(), e9.begin(), e9.end()));
  }
}

TEST(BuildGraph, DeepProjectionCacheMatchesEdgeWeight) {
  std::mt19937_64 rng(43);
  std::vector<std::vector<double>> samples;
  for (int i = 0; i < 30; ++i) samples.push_back(*deep_features(rng, 12)->deep_vector);
  const auto basis = pca_fit(samples, 0.25);
  TrackerConfig cfg;
  cfg.appearance_mode = AppearanceMode::Deep;
  cfg.iou_prune_threshold = 0.3;
  for (int t = 0; t < 50; ++t) {
    auto scene = random_scene(rng, 6, 6, true);
    const auto g = build_graph(scene.prev, scene.next, cfg, &basis);
    for (const auto& e : g.edges) {
      ASSERT_NEAR(e.weight, edge_weight(g.prev_nodes[e.prev], g.next_nodes[e.next], cfg, &basis),
                  1e-12);
    }
  }
}

TEST(ConnectedComponents, NoEdgesGivesSingletons) {
  AssociationGraph g;
  for (int i = 0; i < 3; ++i) g.prev_nodes.push_back(GraphNode::prev(i + 1, {0, 0, 1, 1}, nullptr));
  for (int j = 0; j < 2; ++j) g.next_nodes.push_back(GraphNode::next(det(j, {0, 0, 1, 1}), nullptr));
  const auto comps = connected_components(g);
  ASSERT_EQ(comps.size(), 5u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(comps[i].prev_index, std::vector<std::size_t>{i});
  EXPECT_EQ(comps[3].next_index, std::vector<std::size_t>{0});
  EXPECT_EQ(comps[4].next_index, std::vector<std::size_t>{1});
}

TEST(ConnectedComponents, SingleEdge) {
  AssociationGraph g;
  for (int i = 0; i < 2; ++i) g.prev_nodes.push_back(GraphNode::prev(i + 1, {0, 0, 1, 1}, nullptr));
  for (int j = 0; j < 2; ++j) g.next_nodes.push_back(GraphNode::next(det(j, {0, 0, 1, 1}), nullptr));
  g.edges = {{1, 0, 0.5}};
  const auto comps = connected_components(g);
  ASSERT_EQ(comps.size(), 3u);
  EXPECT_EQ(comps[1].prev_index, std::vector<std::size_t>{1});
  EXPECT_EQ(comps[1].next_index, std::vector<std::size_t>{0});
  ASSERT_EQ(comps[1].graph.edges.size(), 1u);
  EXPECT_EQ(comps[1].graph.edges[0], (Edge{0, 0, 0.5}));
}

TEST(ConnectedComponents, PartitionMatchesSearchOracle) {
  std::mt19937_64 rng(47);
  for (int t = 0; t < 300; ++t) {
    const std::size_t np = rng() % 7, nn = rng() % 7;
    AssociationGraph g;
    for (std::size_t i = 0; i < np; ++i)
      g.prev_nodes.push_back(GraphNode::prev(static_cast<TrackId>(i), {0, 0, 1, 1}, nullptr));
    for (std::size_t j = 0; j < nn; ++j)
      g.next_nodes.push_back(GraphNode::next(det(static_cast<int>(j), {0, 0, 1, 1}), nullptr));
    for (std::size_t i = 0; i < np; ++i)
      for (std::size_t j = 0; j < nn; ++j)
        if (rng() % 5 == 0) g.edges.push_back({i, j, 0.1 * static_cast<double>(rng() % 10)});

    const auto comps = connected_components(g);
    std::set<std::vector<std::size_t>> got;
    std::size_t edges = 0;
    for (const auto& c : comps) {
      std::vector<std::size_t> ids(c.prev_index.begin(), c.prev_index.end());
      for (auto j : c.next_index) ids.push_back(np + j);
      std::sort(ids.begin(), ids.end());
      got.insert(ids);
      edges += c.graph.edges.size();
      for (const auto& e : c.graph.edges) {
        const Edge global{c.prev_index[e.prev], c.next_index[e.next], e.weight};
        ASSERT_NE(std::find(g.edges.begin(), g.edges.end(), global), g.edges.end());
      }
    }
    ASSERT_EQ(got, oracle::bfs_components(np, nn, g.edges));
    ASSERT_EQ(edges, g.edges.size());
  }
}

TEST(SolveComponents, OrderIndependentAndOptimal) {
  std::mt19937_64 rng(53);
  for (int t = 0; t < 100; ++t) {
    auto scene = random_scene(rng, 10, 10, false);
    auto cfg = motion_only(0.2);
    const auto g = build_graph(scene.prev, scene.next, cfg, nullptr);
    auto comps = connected_components(g);
    auto merge = [](const std::vector<Component>& cs, const std::vector<Matching>& ms) {
      std::set<std::pair<std::size_t, std::size_t>> pairs;
      for (std::size_t k = 0; k < cs.size(); ++k)
        for (const auto& [p, n] : ms[k].pairs)
          pairs.emplace(cs[k].prev_index[p], cs[k].next_index[n]);
      return pairs;
    };
    const auto forward =
        merge(comps, solve_components(comps, 0.0, MatchSolver::Exact, ExecutionPolicy::Serial));
    std::reverse(comps.begin(), comps.end());
    const auto backward =
        merge(comps, solve_components(comps, 0.0, MatchSolver::Exact, ExecutionPolicy::Parallel));
    ASSERT_EQ(forward, backward);

    const auto whole = associate(g, cfg);
    const std::set<std::pair<std::size_t, std::size_t>> merged(whole.pairs.begin(),
                                                                whole.pairs.end());
    ASSERT_EQ(merged, forward);
    ASSERT_NEAR(whole.total_weight, oracle::brute_force_best(10, 10, g.edges, 0.0), 1e-9);
  }
}

TEST(Associate, WeightScalingKeepsPairs) {
  std::mt19937_64 rng(59);
  std::vector<std::vector<double>> samples;
  for (int i = 0; i < 30; ++i) samples.push_back(*deep_features(rng, 12)->deep_vector);
  const auto basis = pca_fit(samples, 0.5);
  for (int t = 0; t < 100; ++t) {
    auto scene = random_scene(rng, 6, 6, true);
    TrackerConfig cfg;
    cfg.appearance_mode = AppearanceMode::Deep;
    cfg.iou_prune_threshold = 0.2;
    cfg.alpha = 0.3;
    cfg.beta = 0.7;
    const auto a = associate(build_graph(scene.prev, scene.next, cfg, &basis), cfg);
    cfg.alpha *= 4.0;
    cfg.beta *= 4.0;
    const auto b = associate(build_graph(scene.prev, scene.next, cfg, &basis), cfg);
    ASSERT_EQ(a.pairs, b.pairs);
  }
}

TEST(Associate, SerialAndParallelAgreeExactly) {
  std::mt19937_64 rng(61);
  std::vector<std::vector<double>> samples;
  for (int i = 0; i < 30; ++i) samples.push_back(*deep_features(rng, 12)->deep_vector);
  const auto basis = pca_fit(samples, 0.5);
  for (int t = 0; t < 50; ++t) {
    auto scene = random_scene(rng, 40, 40, true);
    TrackerConfig cfg;
    cfg.appearance_mode = AppearanceMode::Deep;
    cfg.iou_prune_threshold = 0.2;
    cfg.policy = ExecutionPolicy::Serial;
    const auto gs = build_graph(scene.prev, scene.next, cfg, &basis);
    const auto ms = associate(gs, cfg);
    cfg.policy = ExecutionPolicy::Parallel;
    const auto gp = build_graph(scene.prev, scene.next, cfg, &basis);
    const auto mp = associate(gp, cfg);
    ASSERT_EQ(gs.edges, gp.edges);
    ASSERT_EQ(ms.pairs, mp.pairs);
    ASSERT_EQ(ms.total_weight, mp.total_weight);
  }
}

TEST(Associate, GreedySolverIsOneToOne) {
  std::mt19937_64 rng(67);
  for (int t = 0; t < 50; ++t) {
    auto scene = random_scene(rng, 8, 8, false);
    auto cfg = motion_only(0.2);
    cfg.solver = MatchSolver::Greedy;
    const auto g = build_graph(scene.prev, scene.next, cfg, nullptr);
    const auto m = associate(g, cfg);
    ASSERT_NO_THROW(validate_matching(g.edges, m));
  }
}
