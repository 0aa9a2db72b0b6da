// Serial reference kernels against their OpenMP counterparts. The second
// benchmark argument selects the policy: 0 serial, 1 parallel.
#include <memory>
#include <random>

#include <benchmark/benchmark.h>

#include "trackgraph/appearance.hpp"
#include "trackgraph/graph_assoc.hpp"

using namespace trackgraph;

namespace {

ExecutionPolicy policy_of(const benchmark::State& state) {
  return state.range(1) == 0 ? ExecutionPolicy::Serial : ExecutionPolicy::Parallel;
}

std::vector<std::vector<double>> samples(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> out(n, std::vector<double>(d));
  for (auto& v : out)
    for (double& x : v) x = g(rng);
  return out;
}

struct Scene {
  std::vector<GraphNode> prev, next;
  PcaBasis basis;
};

// n tracks on a grid, each with a jittered detection, deep vectors of dim d.
Scene scene(std::size_t n, std::size_t d) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> jitter(0.0, 2.0);
  const auto vecs = samples(2 * n, d, 11);
  Scene s;
  for (std::size_t i = 0; i < n; ++i) {
    const BoundingBox b{static_cast<double>(i % 40) * 45.0, static_cast<double>(i / 40) * 35.0,
                        60.0, 40.0};
    FeatureBundle fp, fn;
    fp.deep_vector = vecs[2 * i];
    fn.deep_vector = vecs[2 * i + 1];
    s.prev.push_back(GraphNode::prev(static_cast<TrackId>(i + 1), b,
                                     std::make_shared<const FeatureBundle>(fp)));
    s.next.push_back(GraphNode::next(
        {2, static_cast<int>(i), {b.x + jitter(rng), b.y + jitter(rng), b.w, b.h}, 1.0},
        std::make_shared<const FeatureBundle>(fn)));
  }
  s.basis = pca_fit(samples(200, d, 13), 0.1);
  return s;
}

void BM_BuildGraph(benchmark::State& state) {
  const auto s = scene(static_cast<std::size_t>(state.range(0)), 1024);
  TrackerConfig cfg;
  cfg.appearance_mode = AppearanceMode::Deep;
  cfg.iou_prune_threshold = 0.2;
  cfg.policy = policy_of(state);
  for (auto _ : state) {
    auto g = build_graph(s.prev, s.next, cfg, &s.basis);
    benchmark::DoNotOptimize(g.edges.data());
  }
}
BENCHMARK(BM_BuildGraph)->ArgsProduct({{200, 800}, {0, 1}})->Unit(benchmark::kMillisecond);

// Many small dense components, the typical shape after IOU pruning.
void BM_SolveComponents(benchmark::State& state) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Component> comps(static_cast<std::size_t>(state.range(0)));
  for (auto& c : comps) {
    const std::size_t rows = 2 + rng() % 5, cols = 2 + rng() % 5;
    for (std::size_t i = 0; i < rows; ++i)
      c.graph.prev_nodes.push_back(GraphNode::prev(static_cast<TrackId>(i), {0, 0, 1, 1}, nullptr));
    for (std::size_t j = 0; j < cols; ++j)
      c.graph.next_nodes.push_back(GraphNode::next({1, static_cast<int>(j), {0, 0, 1, 1}, 1.0}, nullptr));
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j)
        if (u(rng) < 0.7) c.graph.edges.push_back({i, j, u(rng)});
  }
  for (auto _ : state) {
    auto m = solve_components(comps, 0.0, MatchSolver::Exact, policy_of(state));
    benchmark::DoNotOptimize(m.data());
  }
}
BENCHMARK(BM_SolveComponents)->ArgsProduct({{500, 5000}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_ScatterMatrix(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto centered = samples(400, d, 3);
  for (auto _ : state) {
    auto m = scatter_matrix(centered, policy_of(state));
    benchmark::DoNotOptimize(m.data());
  }
}
BENCHMARK(BM_ScatterMatrix)->ArgsProduct({{64, 256}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_PcaFitGram(benchmark::State& state) {
  // More dimensions than samples: the Gram route.
  const auto s = samples(static_cast<std::size_t>(state.range(0)), 4096, 5);
  for (auto _ : state) {
    auto b = pca_fit(s, 0.01, policy_of(state));
    benchmark::DoNotOptimize(b.components.data());
  }
}
BENCHMARK(BM_PcaFitGram)->ArgsProduct({{64, 160}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_ProjectAll(benchmark::State& state) {
  const auto basis = pca_fit(samples(100, 2048, 9), 0.1);
  const auto inputs = samples(static_cast<std::size_t>(state.range(0)), 2048, 10);
  std::vector<std::span<const double>> views(inputs.begin(), inputs.end());
  for (auto _ : state) {
    auto p = pca_project_all(views, basis, policy_of(state));
    benchmark::DoNotOptimize(p.data());
  }
}
BENCHMARK(BM_ProjectAll)->ArgsProduct({{256, 1024}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
