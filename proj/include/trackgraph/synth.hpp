#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "trackgraph/sequence.hpp"

namespace trackgraph {

struct SynthObject {
  /// Box centre at first_frame, in px.
  double start_x = 0.0;
  double start_y = 0.0;
  /// px per frame.
  double vx = 0.0;
  double vy = 0.0;
  double width = 60.0;
  double height = 40.0;
  int first_frame = 1;
  /// 0 means "until the end of the sequence".
  int last_frame = 0;
  /// Inclusive frame ranges with no detection (ground truth stays).
  std::vector<std::pair<int, int>> dropouts;
  /// Feature archetype; -1 picks the object's own index.
  int archetype = -1;
};

struct SynthFeatures {
  int hist_bins_per_channel = 4;
  int bins_per_archetype = 4;
  double hist_mass = 1000.0;
  int keypoints = 8;
  int descriptor_dim = 128;
  int deep_dim = 64;
  /// Relative per-detection feature noise.
  double noise = 0.02;
};

struct SynthScenario {
  std::string name = "synthetic";
  int frames = 0;
  double frame_width = 960.0;
  double frame_height = 540.0;
  /// An object whose in-frame area falls below this fraction of its box has
  /// left the scene for good.
  double min_visible_fraction = 0.5;
  /// Box jitter standard deviation in px.
  double jitter_sigma = 0.0;
  /// Mean number of spurious boxes per frame.
  double spurious_rate = 0.0;
  SynthFeatures features;
  std::vector<SynthObject> objects;
};

/// Reads a scenario from JSON. Throws Error on malformed or inconsistent input.
SynthScenario parse_scenario(std::istream& in);
SynthScenario parse_scenario_file(const std::string& path);

/// Deterministic synthetic sequence with exact ground truth (gt_id = object
/// index + 1). Detections and ground truth are clipped to the frame.
SequenceBundle synth_generate(const SynthScenario& scenario, std::uint64_t seed);

}  // namespace trackgraph
