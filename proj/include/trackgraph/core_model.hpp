#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace trackgraph {

/// Base exception for every recoverable failure in the library (bad input,
/// violated precondition, malformed file).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Axis-aligned box, top-left corner plus size in pixels. The right/bottom
/// edges are exclusive: x2 = x + w, y2 = y + h.
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double area() const { return w * h; }

  bool operator==(const BoundingBox&) const = default;
};

/// True when w, h > 0 and every field is finite.
bool is_valid(const BoundingBox& b);

/// Throws Error when the box is not valid. `what` prefixes the message.
void require_valid(const BoundingBox& b, std::string_view what);

/// Intersection over union. Both boxes must be valid.
double iou(const BoundingBox& a, const BoundingBox& b);

struct Detection {
  int frame_index = 1;
  int det_index = 0;
  BoundingBox bbox;
  double confidence = 1.0;

  bool operator==(const Detection&) const = default;
};

using Descriptor = std::vector<double>;

/// Appearance data attached to one detection. Every field is optional; the
/// active appearance model decides which ones must be present.
struct FeatureBundle {
  std::optional<std::vector<double>> histogram;
  std::optional<std::vector<Descriptor>> descriptors;
  std::optional<std::vector<double>> deep_vector;

  bool empty() const { return !histogram && !descriptors && !deep_vector; }

  bool operator==(const FeatureBundle&) const = default;
};

/// Checks the bundle's internal invariants: non-negative finite histogram and
/// one shared descriptor dimension.
void validate(const FeatureBundle& f);

using FeaturePtr = std::shared_ptr<const FeatureBundle>;

enum class TrackState { Tracking, Lost, Left };

std::string_view to_string(TrackState s);

/// Legal: Tracking->Lost, Tracking->Left, Lost->Tracking, Lost->Left.
bool is_legal_transition(TrackState from, TrackState to);

/// Returns `to`, or throws Error for an illegal transition.
TrackState transition(TrackState from, TrackState to);

enum class ObservationSource { Observed, Hypothetical };

struct Observation {
  int frame_index = 0;
  BoundingBox bbox;
  ObservationSource source = ObservationSource::Observed;

  bool operator==(const Observation&) const = default;
};

using TrackId = std::int64_t;

struct Track {
  TrackId id = 0;
  std::vector<Observation> observations;
  int first_frame = 0;
  TrackState state = TrackState::Tracking;
  int lost_count = 0;
  FeaturePtr last_features;
  /// Frame at which the track was declared Left (no observation there).
  std::optional<int> left_frame;

  const Observation& last() const { return observations.back(); }
  bool active() const { return state != TrackState::Left; }
};

enum class AppearanceMode { SiftHist, Deep, None };

std::string_view to_string(AppearanceMode m);
AppearanceMode parse_appearance_mode(std::string_view s);

enum class MatchSolver { Exact, Greedy };

/// Serial is the reference path; Parallel runs the OpenMP kernels. Both
/// produce identical results.
enum class ExecutionPolicy { Serial, Parallel };

struct TrackerConfig {
  double alpha = 0.5;
  double beta = 0.5;
  double iou_prune_threshold = 0.6;
  AppearanceMode appearance_mode = AppearanceMode::SiftHist;
  double fps = 25.0;
  int max_lost_frames = 25;
  double border_margin_frac = 0.05;
  int hist_bins_per_channel = 8;
  double knn_ratio = 0.8;
  double pca_fraction = 0.1;
  bool sift_match_normalization = true;
  double frame_width = 960.0;
  double frame_height = 540.0;
  double min_match_weight = 0.0;

  // Extensions beyond the core parameter set.
  /// Multiply velocity by fps when extrapolating instead of dividing.
  bool literal_fps_extrapolation = false;
  MatchSolver solver = MatchSolver::Exact;
  int pca_fit_frames = 50;
  ExecutionPolicy policy = ExecutionPolicy::Parallel;

  /// Throws Error naming the first violated constraint.
  void validate() const;
};

}  // namespace trackgraph
