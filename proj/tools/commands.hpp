#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trackgraph/core_model.hpp"
#include "trackgraph/sequence.hpp"

namespace trackgraph::cli {

/// Tracker flags given on the command line; unset ones keep the config value.
struct TrackerOverrides {
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<double> iou_threshold;
  std::optional<std::string> appearance;
  std::optional<double> fps;
  std::optional<int> max_lost;
  std::optional<double> border_margin;
  bool literal_eq10 = false;
  bool greedy = false;
  bool serial = false;
};

struct TrackOptions {
  std::vector<std::string> detections;
  std::vector<std::string> features;
  std::vector<std::string> outputs;
  std::string config;
  TrackerOverrides overrides;
  double min_conf = 0.0;
  int jobs = 1;
  std::string svg_dir;
};

struct EvalOptions {
  std::string tracks;
  std::string gt;
  std::string report;
  std::string label = "trackgraph";
  bool exclude_hypothetical = false;
};

struct SynthOptions {
  std::string spec;
  std::uint64_t seed = 0;
  std::string out_dir;
};

struct PipelineOptions {
  std::string spec;
  std::string config;
  std::uint64_t seed = 0;
  TrackerOverrides overrides;
  double min_conf = 0.0;
  std::string out_dir;
  std::string report;
  bool exclude_hypothetical = false;
};

/// Each command returns the process exit status and reports errors on stderr.
int cmd_track(const TrackOptions& opt);
int cmd_eval(const EvalOptions& opt);
int cmd_synth(const SynthOptions& opt);
int cmd_pipeline(const PipelineOptions& opt);

TrackerConfig load_config(const std::string& path, const TrackerOverrides& overrides);

/// One SVG per frame with every track row drawn; hypothetical boxes dashed.
void write_svg_overlays(const std::string& dir, const SequenceBundle& seq,
                        const std::vector<TrackRow>& rows);

}  // namespace trackgraph::cli
