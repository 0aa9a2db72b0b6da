#include <cstdlib>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("trackgraph");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("TRACKGRAPH_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

void add_tracker_flags(CLI::App* cmd, trackgraph::cli::TrackerOverrides& o) {
  cmd->add_option("--alpha", o.alpha, "Motion weight");
  cmd->add_option("--beta", o.beta, "Appearance weight");
  cmd->add_option("--iou-threshold", o.iou_threshold, "IOU pruning threshold");
  cmd->add_option("--appearance", o.appearance, "Appearance model")
      ->check(CLI::IsMember({"sift", "deep", "none"}));
  cmd->add_option("--fps", o.fps, "Video frame rate");
  cmd->add_option("--max-lost", o.max_lost, "Frames a lost track may coast before it is dropped");
  cmd->add_option("--border-margin", o.border_margin, "Border band as a fraction of frame size");
  cmd->add_flag("--literal-eq10", o.literal_eq10,
                "Extrapolate with velocity * fps instead of velocity / fps");
  cmd->add_flag("--greedy", o.greedy, "Greedy matching instead of the exact solver");
  cmd->add_flag("--serial", o.serial, "Run the serial reference kernels");
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"trackgraph: graph-based multi-object tracking by detection"};
  app.require_subcommand(1);

  trackgraph::cli::TrackOptions track;
  auto* track_cmd = app.add_subcommand("track", "Track detections and write a track CSV");
  track_cmd->add_option("--detections", track.detections, "Detections CSV (repeatable)")->required();
  track_cmd->add_option("--features", track.features, "Feature sidecar JSONL (repeatable)");
  track_cmd->add_option("--config", track.config, "Config file (key = value)");
  track_cmd->add_option("--output", track.outputs, "Output track CSV (repeatable)")->required();
  track_cmd->add_option("--min-conf", track.min_conf, "Drop detections below this confidence");
  track_cmd->add_option("--jobs", track.jobs, "Sequences tracked in parallel");
  track_cmd->add_option("--svg-dir", track.svg_dir, "Write per-frame SVG overlays here");
  add_tracker_flags(track_cmd, track.overrides);

  trackgraph::cli::EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score a track CSV against ground truth");
  eval_cmd->add_option("--tracks", eval.tracks, "Track CSV")->required();
  eval_cmd->add_option("--gt", eval.gt, "Ground truth CSV")->required();
  eval_cmd->add_option("--report", eval.report, "Write key=value report here");
  eval_cmd->add_option("--label", eval.label, "Row label in the printed table");
  eval_cmd->add_flag("--exclude-hypothetical", eval.exclude_hypothetical,
                     "Ignore hypothetical (H) rows");

  trackgraph::cli::SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic sequence");
  synth_cmd->add_option("--spec", synth.spec, "Scenario JSON")->required();
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();

  trackgraph::cli::PipelineOptions pipe;
  auto* pipe_cmd = app.add_subcommand("pipeline", "Synthesize, track and evaluate in one run");
  pipe_cmd->add_option("--spec", pipe.spec, "Scenario JSON")->required();
  pipe_cmd->add_option("--config", pipe.config, "Config file (key = value)");
  pipe_cmd->add_option("--seed", pipe.seed, "Random seed");
  pipe_cmd->add_option("--min-conf", pipe.min_conf, "Drop detections below this confidence");
  pipe_cmd->add_option("--out", pipe.out_dir, "Also write tracks.csv here");
  pipe_cmd->add_option("--report", pipe.report, "Write key=value report here");
  pipe_cmd->add_flag("--exclude-hypothetical", pipe.exclude_hypothetical,
                     "Ignore hypothetical rows when scoring");
  add_tracker_flags(pipe_cmd, pipe.overrides);

  CLI11_PARSE(app, argc, argv);

  if (track_cmd->parsed()) return trackgraph::cli::cmd_track(track);
  if (eval_cmd->parsed()) return trackgraph::cli::cmd_eval(eval);
  if (synth_cmd->parsed()) return trackgraph::cli::cmd_synth(synth);
  if (pipe_cmd->parsed()) return trackgraph::cli::cmd_pipeline(pipe);
  return 1;
}
