#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <spdlog/spdlog.h>

#include "trackgraph/io_formats.hpp"
#include "trackgraph/metrics.hpp"
#include "trackgraph/synth.hpp"
#include "trackgraph/track_manager.hpp"

namespace trackgraph::cli {

namespace fs = std::filesystem;

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

// Rethrows parse errors with the file name in front.
template <typename Fn>
auto with_path(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(path + ": " + e.what());
  }
}

void require_features(const TrackerConfig& cfg, bool have_features) {
  if (cfg.appearance_mode != AppearanceMode::None && !have_features) {
    throw Error("appearance mode '" + std::string(to_string(cfg.appearance_mode)) +
                "' requires a features file (--features); use --appearance none to track "
                "without one");
  }
}

std::string event_summary(const std::string& name, const SequenceBundle& seq,
                          const SequenceResult& res) {
  std::map<EventKind, int> counts;
  for (const auto& e : res.events) ++counts[e.kind];
  std::size_t active = 0;
  for (const auto& t : res.tracks) active += t.active() ? 1 : 0;
  std::ostringstream os;
  os << "sequence " << name << ": frames=" << seq.frame_count << " tracks=" << res.tracks.size()
     << " born=" << counts[EventKind::Born] << " lost=" << counts[EventKind::Lost]
     << " recovered=" << counts[EventKind::Recovered] << " left=" << counts[EventKind::Left]
     << " active=" << active << '\n';
  return os.str();
}

SequenceBundle filter_confidence(SequenceBundle seq, double min_conf) {
  if (min_conf <= 0.0) return seq;
  for (std::size_t f = 0; f < seq.detections.size(); ++f) {
    std::vector<Detection> dets;
    std::vector<FeatureBundle> feats;
    for (std::size_t i = 0; i < seq.detections[f].size(); ++i) {
      if (seq.detections[f][i].confidence < min_conf) continue;
      dets.push_back(seq.detections[f][i]);
      if (i < seq.features[f].size()) feats.push_back(seq.features[f][i]);
    }
    seq.detections[f] = std::move(dets);
    seq.features[f] = std::move(feats);
  }
  return seq;
}

void print_report(const MetricsReport& report, const std::string& label,
                  const std::string& report_path) {
  std::cout << format_report_table(report, label);
  if (!report_path.empty()) {
    auto out = open_out(report_path);
    out << format_report_kv(report);
  }
}

}  // namespace

TrackerConfig load_config(const std::string& path, const TrackerOverrides& o) {
  TrackerConfig cfg;
  if (!path.empty()) {
    auto in = open_in(path);
    cfg = with_path(path, [&] { return parse_config(in); });
  }
  if (o.alpha) cfg.alpha = *o.alpha;
  if (o.beta) cfg.beta = *o.beta;
  if (o.iou_threshold) cfg.iou_prune_threshold = *o.iou_threshold;
  if (o.appearance) cfg.appearance_mode = parse_appearance_mode(*o.appearance);
  if (o.fps) cfg.fps = *o.fps;
  if (o.max_lost) cfg.max_lost_frames = *o.max_lost;
  if (o.border_margin) cfg.border_margin_frac = *o.border_margin;
  if (o.literal_eq10) cfg.literal_fps_extrapolation = true;
  if (o.greedy) cfg.solver = MatchSolver::Greedy;
  if (o.serial) cfg.policy = ExecutionPolicy::Serial;
  cfg.validate();
  return cfg;
}

int cmd_track(const TrackOptions& opt) {
  try {
    if (opt.detections.empty()) throw Error("track: at least one --detections file is required");
    if (opt.outputs.size() != opt.detections.size()) {
      throw Error("track: need one --output per --detections file");
    }
    if (!opt.features.empty() && opt.features.size() != opt.detections.size()) {
      throw Error("track: need one --features file per --detections file");
    }
    if (opt.jobs < 1) throw Error("track: --jobs must be >= 1");
    const TrackerConfig cfg = load_config(opt.config, opt.overrides);
    require_features(cfg, !opt.features.empty());
    if (!opt.svg_dir.empty() && opt.detections.size() > 1) {
      throw Error("track: --svg-dir supports a single sequence");
    }

    const auto n = static_cast<std::ptrdiff_t>(opt.detections.size());
    std::vector<std::string> summaries(opt.detections.size());
    std::vector<std::string> errors(opt.detections.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(opt.jobs)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      try {
        const std::string& det_path = opt.detections[k];
        spdlog::info("tracking {} (appearance {})", det_path, to_string(cfg.appearance_mode));
        auto det_in = open_in(det_path);
        const auto dets = with_path(det_path, [&] { return parse_detections(det_in, opt.min_conf); });
        std::optional<FeatureSidecar> sidecar;
        if (!opt.features.empty()) {
          auto feat_in = open_in(opt.features[k]);
          sidecar = with_path(opt.features[k], [&] { return parse_features(feat_in); });
        }
        const auto name = fs::path(det_path).stem().string();
        const auto seq = assemble_sequence(name, dets, sidecar ? &*sidecar : nullptr,
                                           cfg.frame_width, cfg.frame_height);
        const auto result = run_sequence(seq, cfg);
        const auto rows = track_rows(result.tracks);
        {
          auto out = open_out(opt.outputs[k]);
          write_track_rows(out, rows);
        }
        if (!opt.svg_dir.empty()) write_svg_overlays(opt.svg_dir, seq, rows);
        summaries[k] = event_summary(name, seq, result);
        spdlog::debug("wrote {} rows to {}", rows.size(), opt.outputs[k]);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
    int status = 0;
    for (std::size_t k = 0; k < summaries.size(); ++k) {
      if (!errors[k].empty()) {
        std::cerr << "error: " << errors[k] << '\n';
        status = 1;
      } else {
        std::cout << summaries[k];
      }
    }
    return status;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_eval(const EvalOptions& opt) {
  try {
    auto gt_in = open_in(opt.gt);
    const auto gt = with_path(opt.gt, [&] { return parse_gt(gt_in); });
    if (gt.empty()) throw Error(opt.gt + ": ground truth is empty; MOTA is undefined");
    auto tr_in = open_in(opt.tracks);
    const auto rows = with_path(opt.tracks, [&] { return parse_tracks(tr_in); });
    const auto report = evaluate(gt, rows, !opt.exclude_hypothetical);
    print_report(report, opt.label, opt.report);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_synth(const SynthOptions& opt) {
  try {
    const auto scenario = parse_scenario_file(opt.spec);
    const auto seq = synth_generate(scenario, opt.seed);
    fs::create_directories(opt.out_dir);
    const fs::path dir(opt.out_dir);
    {
      auto out = open_out((dir / "detections.csv").string());
      write_detections(out, detections_by_frame(seq));
    }
    {
      auto out = open_out((dir / "features.jsonl").string());
      write_features(out, features_of(seq));
    }
    {
      auto out = open_out((dir / "gt.csv").string());
      write_gt(out, *seq.gt);
    }
    {
      auto out = open_out((dir / "sequence.cfg").string());
      if (seq.frame_count > 0) {
        out << "frame_width = " << format_number(seq.frame_width) << '\n'
            << "frame_height = " << format_number(seq.frame_height) << '\n';
      }
    }
    std::cout << "synthesized " << seq.name << ": frames=" << seq.frame_count
              << " objects=" << scenario.objects.size() << " gt=" << seq.gt->size() << '\n';
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_pipeline(const PipelineOptions& opt) {
  try {
    const TrackerConfig cfg = load_config(opt.config, opt.overrides);
    const auto scenario = parse_scenario_file(opt.spec);
    const auto seq = filter_confidence(synth_generate(scenario, opt.seed), opt.min_conf);
    const auto result = run_sequence(seq, cfg);
    const auto rows = track_rows(result.tracks);
    if (!opt.out_dir.empty()) {
      fs::create_directories(opt.out_dir);
      auto out = open_out((fs::path(opt.out_dir) / "tracks.csv").string());
      write_track_rows(out, rows);
    }
    std::cout << event_summary(seq.name, seq, result);
    if (seq.gt->empty()) throw Error("scenario produced no ground truth; MOTA is undefined");
    const auto report = evaluate(*seq.gt, rows, !opt.exclude_hypothetical);
    print_report(report, seq.name, opt.report);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

void write_svg_overlays(const std::string& dir, const SequenceBundle& seq,
                        const std::vector<TrackRow>& rows) {
  fs::create_directories(dir);
  std::map<int, std::vector<const TrackRow*>> by_frame;
  for (const auto& r : rows) by_frame[r.frame_index].push_back(&r);
  static const char* palette[] = {"#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4",
                                  "#42d4f4", "#f032e6", "#9a6324", "#800000", "#000075"};
  for (int f = 1; f <= seq.frame_count; ++f) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06d.svg", f);
    auto out = open_out((fs::path(dir) / name).string());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_number(seq.frame_width)
        << "\" height=\"" << format_number(seq.frame_height) << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"#202020\"/>\n";
    for (const auto& d : seq.detections[static_cast<std::size_t>(f - 1)]) {
      out << "<rect x=\"" << format_number(d.bbox.x) << "\" y=\"" << format_number(d.bbox.y)
          << "\" width=\"" << format_number(d.bbox.w) << "\" height=\""
          << format_number(d.bbox.h) << "\" fill=\"none\" stroke=\"#808080\"/>\n";
    }
    for (const TrackRow* r : by_frame[f]) {
      const char* color = palette[static_cast<std::size_t>(r->track_id) % std::size(palette)];
      const bool hyp = r->source == ObservationSource::Hypothetical;
      out << "<rect x=\"" << format_number(r->bbox.x) << "\" y=\"" << format_number(r->bbox.y)
          << "\" width=\"" << format_number(r->bbox.w) << "\" height=\""
          << format_number(r->bbox.h) << "\" fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"2\"" << (hyp ? " stroke-dasharray=\"6,4\"" : "") << "/>\n"
          << "<text x=\"" << format_number(r->bbox.x) << "\" y=\"" << format_number(r->bbox.y - 3)
          << "\" fill=\"" << color << "\" font-size=\"12\">" << r->track_id << "</text>\n";
    }
    out << "</svg>\n";
  }
}

}  // namespace trackgraph::cli
