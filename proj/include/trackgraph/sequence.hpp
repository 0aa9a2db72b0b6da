#pragma once

#include <optional>
#include <string>
#include <vector>

#include "trackgraph/core_model.hpp"

namespace trackgraph {

struct GtEntry {
  int frame_index = 0;
  int gt_id = 0;
  BoundingBox bbox;

  bool operator==(const GtEntry&) const = default;
};

/// One row of tracker output: a track's position claim in one frame.
struct TrackRow {
  int frame_index = 0;
  TrackId track_id = 0;
  BoundingBox bbox;
  ObservationSource source = ObservationSource::Observed;

  bool operator==(const TrackRow&) const = default;
};

/// Flattens tracks into rows sorted by (frame, track id).
std::vector<TrackRow> track_rows(const std::vector<Track>& tracks);

/// Everything needed to track (and optionally score) one sequence.
struct SequenceBundle {
  std::string name;
  int frame_count = 0;
  double frame_width = 960.0;
  double frame_height = 540.0;
  /// detections[f - 1] holds frame f, det_index ascending.
  std::vector<std::vector<Detection>> detections;
  /// Aligned with `detections`; empty bundles when no sidecar was given.
  std::vector<std::vector<FeatureBundle>> features;
  std::optional<std::vector<GtEntry>> gt;
};

}  // namespace trackgraph
