#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "trackgraph/appearance.hpp"

using namespace trackgraph;

namespace {

// Exhaustive two-nearest-neighbour ratio count, written out independently.
int knn_oracle(const std::vector<Descriptor>& a, const std::vector<Descriptor>& b, double ratio) {
  int count = 0;
  for (const auto& q : a) {
    std::vector<double> d;
    for (const auto& c : b) {
      double s = 0;
      for (std::size_t i = 0; i < q.size(); ++i) s += (q[i] - c[i]) * (q[i] - c[i]);
      d.push_back(std::sqrt(s));
    }
    std::sort(d.begin(), d.end());
    if (d.empty()) continue;
    if (d.size() == 1 || d[0] <= ratio * d[1]) ++count;
  }
  return count;
}

std::vector<Descriptor> random_descriptors(std::mt19937_64& rng, int n, int dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Descriptor> out(static_cast<std::size_t>(n), Descriptor(static_cast<std::size_t>(dim)));
  for (auto& d : out)
    for (double& x : d) x = g(rng);
  return out;
}

}  // namespace

TEST(HistogramIntersection, IdenticalIsOne) {
  const std::vector<double> h{3, 1, 4};
  EXPECT_DOUBLE_EQ(histogram_intersection(h, h), 1.0);
}

TEST(HistogramIntersection, DisjointSupportIsZero) {
  EXPECT_DOUBLE_EQ(histogram_intersection(std::vector<double>{5, 0}, std::vector<double>{0, 5}), 0.0);
}

TEST(HistogramIntersection, DirectEvaluation) {
  // sum of minima 1 + 2 = 3, larger mass max(4, 4) = 4.
  EXPECT_NEAR(histogram_intersection(std::vector<double>{2, 2}, std::vector<double>{1, 3}), 0.75,
              1e-12);
}

TEST(HistogramIntersection, Errors) {
  EXPECT_THROW(histogram_intersection(std::vector<double>{1, 2}, std::vector<double>{1}), Error);
  EXPECT_THROW(histogram_intersection(std::vector<double>{0, 0}, std::vector<double>{0, 0}), Error);
  EXPECT_DOUBLE_EQ(histogram_intersection(std::vector<double>{0, 0}, std::vector<double>{1, 0}), 0.0);
}

TEST(HistogramIntersection, RandomPropertiesHold) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  for (int t = 0; t < 2000; ++t) {
    std::vector<double> a(16), b(16);
    for (auto& x : a) x = u(rng);
    for (auto& x : b) x = u(rng);
    const double ab = histogram_intersection(a, b);
    ASSERT_GE(ab, 0.0);
    ASSERT_LE(ab, 1.0);
    ASSERT_DOUBLE_EQ(ab, histogram_intersection(b, a));
    ASSERT_DOUBLE_EQ(histogram_intersection(a, a), 1.0);
  }
}

TEST(MatchKeypoints, SelfMatchCountsEveryDescriptor) {
  std::mt19937_64 rng(5);
  const auto ds = random_descriptors(rng, 7, 128);
  EXPECT_EQ(match_keypoints(ds, ds, 0.8), 7);
}

TEST(MatchKeypoints, EmptyQueryGivesZero) {
  std::mt19937_64 rng(5);
  EXPECT_EQ(match_keypoints({}, random_descriptors(rng, 3, 4), 0.8), 0);
}

TEST(MatchKeypoints, RatioTestExample) {
  const std::vector<Descriptor> a{{0, 0}};
  const std::vector<Descriptor> b{{1, 0}, {10, 0}};
  EXPECT_EQ(knn_oracle(a, b, 0.8), 1);
  EXPECT_EQ(match_keypoints(a, b, 0.8), 1);
  // 1 <= 0.05 * 10 fails.
  EXPECT_EQ(match_keypoints(a, b, 0.05), 0);
}

TEST(MatchKeypoints, SingleCandidateAlwaysMatches) {
  const std::vector<Descriptor> a{{0, 0}, {100, 100}};
  const std::vector<Descriptor> b{{50, 50}};
  EXPECT_EQ(match_keypoints(a, b, 0.1), 2);
}

TEST(MatchKeypoints, DimensionMismatchThrows) {
  EXPECT_THROW(match_keypoints({{1, 2}}, {{1, 2, 3}}, 0.8), Error);
}

TEST(MatchKeypoints, AgreesWithExhaustiveOracle) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 200; ++t) {
    const auto a = random_descriptors(rng, 1 + static_cast<int>(rng() % 9), 6);
    const auto b = random_descriptors(rng, static_cast<int>(rng() % 9), 6);
    const double ratio = 0.5 + 0.5 * static_cast<double>(rng() % 100) / 100.0;
    const int n = match_keypoints(a, b, ratio);
    ASSERT_EQ(n, knn_oracle(a, b, ratio));
    ASSERT_LE(n, static_cast<int>(a.size()));
  }
}

TEST(AppearanceSift, IdenticalBundleScoresOne) {
  std::mt19937_64 rng(1);
  FeatureBundle f;
  f.histogram = std::vector<double>{3, 4, 0, 1};
  f.descriptors = random_descriptors(rng, 7, 16);
  EXPECT_DOUBLE_EQ(appearance_sift(f, f, TrackerConfig{}), 1.0);
}

TEST(AppearanceSift, DisjointHistogramsScoreZero) {
  std::mt19937_64 rng(1);
  FeatureBundle a, b;
  a.histogram = std::vector<double>{5, 0};
  b.histogram = std::vector<double>{0, 5};
  a.descriptors = b.descriptors = random_descriptors(rng, 5, 8);
  EXPECT_EQ(appearance_sift(a, b, TrackerConfig{}), 0.0);
}

TEST(AppearanceSift, ComposesCountAndIntersection) {
  FeatureBundle a, b;
  a.histogram = std::vector<double>{2, 2};
  b.histogram = std::vector<double>{1, 3};
  a.descriptors = std::vector<Descriptor>{{0, 0}, {10, 0}, {0, 10}, {100, 100}};
  b.descriptors = std::vector<Descriptor>{{0, 0.1}, {10, 0.1}, {0, 10.1}, {-50, 50}};
  const int n = knn_oracle(*a.descriptors, *b.descriptors, 0.8);
  ASSERT_EQ(n, 3);
  TrackerConfig cfg;
  EXPECT_NEAR(appearance_sift(a, b, cfg), 0.5625, 1e-12);  // 3/4 * 0.75
  cfg.sift_match_normalization = false;
  EXPECT_NEAR(appearance_sift(a, b, cfg), 3 * 0.75, 1e-12);
}

TEST(AppearanceSift, NormalisedScoreStaysInUnitInterval) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int t = 0; t < 300; ++t) {
    FeatureBundle a, b;
    a.histogram = std::vector<double>(8);
    b.histogram = std::vector<double>(8);
    for (auto& x : *a.histogram) x = u(rng) + 0.01;
    for (auto& x : *b.histogram) x = u(rng);
    a.descriptors = random_descriptors(rng, static_cast<int>(rng() % 12), 4);
    b.descriptors = random_descriptors(rng, static_cast<int>(rng() % 3), 4);
    const double s = appearance_sift(a, b, TrackerConfig{});
    ASSERT_GE(s, 0.0);
    ASSERT_LE(s, 1.0);
  }
}

TEST(AppearanceSift, MissingFieldIsNamed) {
  FeatureBundle a, b;
  a.histogram = b.histogram = std::vector<double>{1};
  a.descriptors = std::vector<Descriptor>{};
  try {
    appearance_sift(a, b, TrackerConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("descriptors"), std::string::npos);
  }
}

TEST(CosineSimilarity, Examples) {
  EXPECT_NEAR(cosine_similarity(std::vector<double>{2, 3, 5}, std::vector<double>{2, 3, 5}), 1.0,
              1e-15);
  EXPECT_DOUBLE_EQ(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  EXPECT_NEAR(cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{1, 1}),
              1.0 / std::sqrt(2.0), 1e-8);
}

TEST(CosineSimilarity, ZeroNormThrows) {
  EXPECT_THROW(cosine_similarity(std::vector<double>{0, 0}, std::vector<double>{1, 1}), Error);
  EXPECT_THROW(cosine_similarity(std::vector<double>{1}, std::vector<double>{1, 1}), Error);
}

TEST(CosineSimilarity, SymmetricAndScaleInvariant) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> c(0.01, 100.0);
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> a(10), b(10);
    for (auto& x : a) x = g(rng);
    for (auto& x : b) x = g(rng);
    const double s = cosine_similarity(a, b);
    ASSERT_NEAR(s, cosine_similarity(b, a), 1e-15);
    auto scaled = a;
    const double k = c(rng);
    for (auto& x : scaled) x *= k;
    ASSERT_NEAR(cosine_similarity(scaled, b), s, 1e-9);
  }
}

TEST(AppearanceDeep, ScoresProjectedCosine) {
  PcaBasis basis;
  basis.mean = {0, 0};
  basis.components = {{1, 0}, {0, 1}};
  basis.variances = {1, 1};
  FeatureBundle a, b, c, z;
  a.deep_vector = std::vector<double>{1, 0};
  b.deep_vector = std::vector<double>{1, 1};
  c.deep_vector = std::vector<double>{0, 3};
  z.deep_vector = std::vector<double>{0, 0};
  EXPECT_NEAR(appearance_deep(a, a, basis).score, 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(appearance_deep(a, c, basis).score, 0.0);
  EXPECT_NEAR(appearance_deep(a, b, basis).score, 1.0 / std::sqrt(2.0), 1e-8);

  const auto degenerate = appearance_deep(a, z, basis);
  EXPECT_TRUE(degenerate.degenerate);
  EXPECT_EQ(degenerate.score, 0.0);

  FeatureBundle neg;
  neg.deep_vector = std::vector<double>{-1, 0};
  EXPECT_EQ(appearance_deep(a, neg, basis).score, 0.0);  // clamped

  FeatureBundle none;
  EXPECT_THROW(appearance_deep(a, none, basis), Error);
}
