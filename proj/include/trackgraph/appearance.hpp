#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "trackgraph/core_model.hpp"

namespace trackgraph {

/// Histogram intersection: sum of bin-wise minima over the larger total mass.
/// Throws on length mismatch or when both histograms are empty of mass.
double histogram_intersection(std::span<const double> h1, std::span<const double> h2);

/// Counts descriptors of `a` whose nearest neighbour in `b` passes the ratio
/// test (nearest <= ratio * second nearest, Euclidean). A single-element `b`
/// always matches.
int match_keypoints(const std::vector<Descriptor>& a, const std::vector<Descriptor>& b,
                    double ratio);

/// Keypoint-count times histogram intersection. With normalisation on, the
/// count is divided by the smaller keypoint set (at least 1) and capped at 1.
double appearance_sift(const FeatureBundle& a, const FeatureBundle& b, const TrackerConfig& cfg);

double cosine_similarity(std::span<const double> f1, std::span<const double> f2);

struct PcaBasis {
  std::vector<double> mean;
  /// k orthonormal rows of dimension d, strongest variance first.
  std::vector<std::vector<double>> components;
  /// Variance along each component; zero for padded completion vectors.
  std::vector<double> variances;

  std::size_t dim() const { return mean.size(); }
  std::size_t rank() const { return components.size(); }
};

/// ceil(fraction * d), at least 1 and at most d.
std::size_t pca_component_count(std::size_t d, double fraction);

/// Fits mean and top principal components. When the samples span fewer
/// nonzero-variance directions than requested, the basis is completed by
/// Gram-Schmidt over the standard basis vectors e_0, e_1, ... in order.
PcaBasis pca_fit(const std::vector<std::vector<double>>& samples, double fraction,
                 ExecutionPolicy policy = ExecutionPolicy::Parallel);

std::vector<double> pca_project(std::span<const double> v, const PcaBasis& basis);

/// Projects many vectors at once; one OpenMP task per vector in Parallel mode.
std::vector<std::vector<double>> pca_project_all(
    const std::vector<std::span<const double>>& vs, const PcaBasis& basis,
    ExecutionPolicy policy = ExecutionPolicy::Parallel);

struct DeepSimilarity {
  double score = 0.0;
  /// Set when one projection had zero norm; the score is then 0.
  bool degenerate = false;
};

/// Cosine similarity of already projected vectors, clamped below at 0.
DeepSimilarity deep_similarity_projected(std::span<const double> pa, std::span<const double> pb);

DeepSimilarity appearance_deep(const FeatureBundle& a, const FeatureBundle& b,
                               const PcaBasis& basis);

struct SymmetricEigen {
  std::vector<double> values;
  /// Row i is the unit eigenvector for values[i]. Unsorted.
  std::vector<std::vector<double>> vectors;
};

/// Cyclic Jacobi eigendecomposition of a symmetric n x n row-major matrix.
SymmetricEigen jacobi_eigen(std::vector<double> matrix, std::size_t n);

/// Cᵀ·C for row vectors C (n x d); returns d x d row-major.
std::vector<double> scatter_matrix(const std::vector<std::vector<double>>& centered,
                                   ExecutionPolicy policy);

/// C·Cᵀ for row vectors C (n x d); returns n x n row-major.
std::vector<double> gram_matrix(const std::vector<std::vector<double>>& centered,
                                ExecutionPolicy policy);

}  // namespace trackgraph
