#include "trackgraph/appearance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace trackgraph {

double histogram_intersection(std::span<const double> h1, std::span<const double> h2) {
  if (h1.size() != h2.size()) {
    throw Error("histogram_intersection: length mismatch (" + std::to_string(h1.size()) +
                " vs " + std::to_string(h2.size()) + ")");
  }
  double common = 0.0;
  double sum1 = 0.0;
  double sum2 = 0.0;
  for (std::size_t i = 0; i < h1.size(); ++i) {
    if (h1[i] < 0.0 || h2[i] < 0.0) {
      throw Error("histogram_intersection: negative bin");
    }
    common += std::min(h1[i], h2[i]);
    sum1 += h1[i];
    sum2 += h2[i];
  }
  const double denom = std::max(sum1, sum2);
  if (denom <= 0.0) {
    throw Error("histogram_intersection: both histograms have zero mass");
  }
  return std::clamp(common / denom, 0.0, 1.0);
}

namespace {

std::size_t common_dimension(const std::vector<Descriptor>& a, const std::vector<Descriptor>& b) {
  std::size_t dim = 0;
  bool seen = false;
  for (const auto* set : {&a, &b}) {
    for (const auto& d : *set) {
      if (!seen) {
        dim = d.size();
        seen = true;
      } else if (d.size() != dim) {
        throw Error("match_keypoints: descriptor dimension mismatch (" + std::to_string(dim) +
                    " vs " + std::to_string(d.size()) + ")");
      }
    }
  }
  return dim;
}

double squared_distance(const Descriptor& p, const Descriptor& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - q[i];
    s += d * d;
  }
  return s;
}

}  // namespace

int match_keypoints(const std::vector<Descriptor>& a, const std::vector<Descriptor>& b,
                    double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw Error("match_keypoints: ratio must lie in (0, 1]");
  }
  common_dimension(a, b);
  if (a.empty() || b.empty()) {
    return 0;
  }
  if (b.size() == 1) {
    return static_cast<int>(a.size());
  }
  int matches = 0;
  for (const auto& query : a) {
    double best = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    for (const auto& cand : b) {
      const double d = squared_distance(query, cand);
      if (d < best) {
        second = best;
        best = d;
      } else if (d < second) {
        second = d;
      }
    }
    if (std::sqrt(best) <= ratio * std::sqrt(second)) {
      ++matches;
    }
  }
  return matches;
}

double appearance_sift(const FeatureBundle& a, const FeatureBundle& b, const TrackerConfig& cfg) {
  for (const auto* f : {&a, &b}) {
    if (!f->histogram) throw Error("appearance_sift: feature bundle has no histogram");
    if (!f->descriptors) throw Error("appearance_sift: feature bundle has no descriptors");
  }
  const double inter = histogram_intersection(*a.histogram, *b.histogram);
  const int n = match_keypoints(*a.descriptors, *b.descriptors, cfg.knn_ratio);
  double count = static_cast<double>(n);
  if (cfg.sift_match_normalization) {
    const double smaller =
        static_cast<double>(std::min(a.descriptors->size(), b.descriptors->size()));
    // Several query keypoints may share one nearest neighbour, so the ratio
    // can exceed 1 when the sets differ in size.
    count = std::min(1.0, count / std::max(1.0, smaller));
  }
  return count * inter;
}

double cosine_similarity(std::span<const double> f1, std::span<const double> f2) {
  if (f1.size() != f2.size()) {
    throw Error("cosine_similarity: dimension mismatch (" + std::to_string(f1.size()) + " vs " +
                std::to_string(f2.size()) + ")");
  }
  double dot = 0.0;
  double n1 = 0.0;
  double n2 = 0.0;
  for (std::size_t i = 0; i < f1.size(); ++i) {
    dot += f1[i] * f2[i];
    n1 += f1[i] * f1[i];
    n2 += f2[i] * f2[i];
  }
  if (n1 <= 0.0 || n2 <= 0.0) {
    throw Error("cosine_similarity: zero-norm feature vector");
  }
  return std::clamp(dot / (std::sqrt(n1) * std::sqrt(n2)), -1.0, 1.0);
}

DeepSimilarity deep_similarity_projected(std::span<const double> pa, std::span<const double> pb) {
  if (pa.size() != pb.size()) {
    throw Error("appearance_deep: projection dimension mismatch");
  }
  double n1 = 0.0;
  double n2 = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    n1 += pa[i] * pa[i];
    n2 += pb[i] * pb[i];
  }
  if (n1 <= 0.0 || n2 <= 0.0) {
    return {0.0, true};
  }
  return {std::max(0.0, cosine_similarity(pa, pb)), false};
}

DeepSimilarity appearance_deep(const FeatureBundle& a, const FeatureBundle& b,
                               const PcaBasis& basis) {
  if (!a.deep_vector || !b.deep_vector) {
    throw Error("appearance_deep: feature bundle has no deep vector");
  }
  const auto pa = pca_project(*a.deep_vector, basis);
  const auto pb = pca_project(*b.deep_vector, basis);
  return deep_similarity_projected(pa, pb);
}

}  // namespace trackgraph
