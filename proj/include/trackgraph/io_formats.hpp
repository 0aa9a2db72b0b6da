#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trackgraph/core_model.hpp"
#include "trackgraph/sequence.hpp"

namespace trackgraph {

// Text formats
// ------------
// detections : `frame,id,x,y,w,h,conf` per line, no header; id is ignored on
//              input and written as -1.
// ground truth: `frame,gt_id,x,y,w,h` per line, no header.
// tracks     : header `frame,track_id,x,y,w,h,source`, then one row per
//              observation, source O (observed) or H (hypothetical).
// features   : JSON lines `{"frame":F,"det":D,"histogram":[..],
//              "descriptors":[[..],..],"deep":[..]}`, any subset of the three
//              feature keys. An optional `{"header":{...}}` line carries
//              metadata such as "deep_dim".
// config     : `key = value` lines named after TrackerConfig fields; `#`
//              starts a comment.
//
// Every parser rejects malformed input with the offending line number. Blank
// lines are ignored.

/// Detections grouped by frame (ascending); det_index follows file order
/// within each frame.
using DetectionsByFrame = std::map<int, std::vector<Detection>>;

DetectionsByFrame parse_detections(std::istream& in, double min_confidence = 0.0);
void write_detections(std::ostream& out, const DetectionsByFrame& dets);

std::vector<GtEntry> parse_gt(std::istream& in);
void write_gt(std::ostream& out, const std::vector<GtEntry>& gt);

std::vector<TrackRow> parse_tracks(std::istream& in);
void write_tracks(std::ostream& out, const std::vector<Track>& tracks);
void write_track_rows(std::ostream& out, const std::vector<TrackRow>& rows);

using FeatureKey = std::pair<int, int>;  // (frame, det)

struct FeatureSidecar {
  std::map<FeatureKey, FeatureBundle> bundles;
  /// Contents of the optional header line, as compact JSON text.
  std::optional<std::string> header;
};

FeatureSidecar parse_features(std::istream& in);
void write_features(std::ostream& out, const FeatureSidecar& sidecar);

/// Applies `key = value` lines on top of `base`.
TrackerConfig parse_config(std::istream& in, TrackerConfig base = {});
void write_config(std::ostream& out, const TrackerConfig& cfg);

/// Sets one config field by name; throws Error for unknown keys or bad values.
void set_config_value(TrackerConfig& cfg, const std::string& key, const std::string& value);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

/// Builds a SequenceBundle from parsed inputs: frames 1..max frame present
/// (or `frame_count` when larger), features aligned by (frame, det) with
/// empty bundles where the sidecar has none.
SequenceBundle assemble_sequence(std::string name, const DetectionsByFrame& dets,
                                 const FeatureSidecar* features, double frame_width,
                                 double frame_height, int frame_count = 0);

/// Flattens a bundle's detections back to the per-frame map.
DetectionsByFrame detections_by_frame(const SequenceBundle& seq);

/// Collects a bundle's features keyed by (frame, det), skipping empty ones.
FeatureSidecar features_of(const SequenceBundle& seq);

}  // namespace trackgraph
