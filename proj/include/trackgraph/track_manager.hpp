#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "trackgraph/appearance.hpp"
#include "trackgraph/core_model.hpp"
#include "trackgraph/graph_assoc.hpp"
#include "trackgraph/sequence.hpp"

namespace trackgraph {

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

Point center(const BoundingBox& b);

/// Average velocity in px/s over the track's whole history: displacement
/// from the first observation to the latest one, divided by the time from
/// the first frame to the frame about to be processed (latest + 1).
Point velocity(const Track& t, const TrackerConfig& cfg);

/// Latest box moved by one frame of motion (velocity / fps), or by
/// velocity * fps when cfg.literal_fps_extrapolation is set.
BoundingBox predict_position(const Track& t, const TrackerConfig& cfg);

/// Left when the latest box centre lies within the border margin or the
/// track has already coasted max_lost_frames frames; Lost otherwise.
TrackState classify_missing(const Track& t, const TrackerConfig& cfg);

/// Appends a hypothetical observation one frame after the latest one and
/// bumps lost_count. Features stay frozen at the last real observation.
Observation spawn_hypothetical(Track& t, const TrackerConfig& cfg);

enum class EventKind { Born, Extended, Recovered, Lost, Left };

std::string_view to_string(EventKind k);

struct TrackEvent {
  EventKind kind = EventKind::Born;
  TrackId track_id = 0;
  int frame_index = 0;
  /// Detection consumed by Born, Extended and Recovered events.
  std::optional<int> det_index;

  bool operator==(const TrackEvent&) const = default;
};

struct StepResult {
  std::vector<TrackEvent> events;
  AssociationGraph graph;
  /// Indices into graph.prev_nodes / graph.next_nodes.
  Matching matching;
};

/// Frame-by-frame tracking state machine.
class TrackerEngine {
public:
  /// Deep mode needs `basis`; the other modes ignore it.
  explicit TrackerEngine(TrackerConfig cfg, std::optional<PcaBasis> basis = std::nullopt);

  /// Processes frame current_frame() + 1. `features` is aligned with
  /// `detections`; it may be empty only in appearance mode None.
  StepResult step(const std::vector<Detection>& detections,
                  const std::vector<FeatureBundle>& features);

  const TrackerConfig& config() const { return cfg_; }
  const std::optional<PcaBasis>& pca_basis() const { return basis_; }
  const std::vector<Track>& tracks() const { return tracks_; }
  int current_frame() const { return current_frame_; }
  std::size_t active_count() const;

private:
  TrackerConfig cfg_;
  std::optional<PcaBasis> basis_;
  std::vector<Track> tracks_;
  TrackId next_track_id_ = 1;
  int current_frame_ = 0;
};

/// Fits the deep-feature basis on every deep vector from the first
/// cfg.pca_fit_frames frames of the sequence.
PcaBasis fit_sequence_basis(const SequenceBundle& seq, const TrackerConfig& cfg);

struct SequenceResult {
  std::vector<Track> tracks;
  std::vector<TrackEvent> events;
  /// Per-frame graphs and matchings, kept only when requested.
  std::vector<StepResult> steps;
};

/// Runs the engine over frames 1..frame_count. Frame size in `cfg` is
/// replaced by the sequence's own.
SequenceResult run_sequence(const SequenceBundle& seq, TrackerConfig cfg,
                            bool keep_steps = false);

}  // namespace trackgraph
