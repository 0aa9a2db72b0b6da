#include "trackgraph/io_formats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <string_view>

#include <json.hpp>

namespace trackgraph {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail_line(std::size_t line, const std::string& msg) {
  throw Error("line " + std::to_string(line) + ": " + msg);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double to_double(std::string_view s, std::size_t line, const char* field) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (!s.empty() && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    fail_line(line, std::string("field '") + field + "' is not a finite number: '" +
                        std::string(s) + "'");
  }
  return v;
}

long long to_integer(std::string_view s, std::size_t line, const char* field) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    fail_line(line, std::string("field '") + field + "' is not an integer: '" + std::string(s) +
                        "'");
  }
  return v;
}

BoundingBox parse_box(const std::vector<std::string_view>& f, std::size_t offset,
                      std::size_t line) {
  BoundingBox b{to_double(f[offset], line, "x"), to_double(f[offset + 1], line, "y"),
                to_double(f[offset + 2], line, "w"), to_double(f[offset + 3], line, "h")};
  if (!(b.w > 0.0) || !(b.h > 0.0)) {
    fail_line(line, "box width and height must be positive");
  }
  return b;
}

int parse_frame(std::string_view s, std::size_t line) {
  const long long f = to_integer(s, line, "frame");
  if (f < 1 || f > 100'000'000) fail_line(line, "frame must be >= 1");
  return static_cast<int>(f);
}

// Calls fn(line_number, text) for every non-blank line.
template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    if (trim(text).empty()) continue;
    fn(number, std::string_view(text));
  }
}

void write_box(std::ostream& out, const BoundingBox& b) {
  out << format_number(b.x) << ',' << format_number(b.y) << ',' << format_number(b.w) << ','
      << format_number(b.h);
}

std::vector<double> json_numbers(const json& j, std::size_t line, const char* key) {
  if (!j.is_array()) fail_line(line, std::string("'") + key + "' must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) fail_line(line, std::string("'") + key + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error("expected a boolean, got '" + v + "'");
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("format_number: conversion failed");
  return std::string(buf, ptr);
}

DetectionsByFrame parse_detections(std::istream& in, double min_confidence) {
  DetectionsByFrame out;
  std::map<int, int> position;
  for_each_line(in, [&](std::size_t line, std::string_view text) {
    const auto f = split_csv(text);
    if (f.size() != 7) {
      fail_line(line, "expected 7 fields frame,id,x,y,w,h,conf, got " + std::to_string(f.size()));
    }
    Detection d;
    d.frame_index = parse_frame(f[0], line);
    to_double(f[1], line, "id");
    d.bbox = parse_box(f, 2, line);
    d.confidence = to_double(f[6], line, "conf");
    if (d.confidence < 0.0 || d.confidence > 1.0) fail_line(line, "conf must lie in [0, 1]");
    d.det_index = position[d.frame_index]++;
    if (d.confidence >= min_confidence) out[d.frame_index].push_back(d);
  });
  return out;
}

void write_detections(std::ostream& out, const DetectionsByFrame& dets) {
  for (const auto& [frame, list] : dets) {
    for (const auto& d : list) {
      out << d.frame_index << ",-1,";
      write_box(out, d.bbox);
      out << ',' << format_number(d.confidence) << '\n';
    }
  }
}

std::vector<GtEntry> parse_gt(std::istream& in) {
  std::vector<GtEntry> out;
  std::set<std::pair<int, int>> seen;
  for_each_line(in, [&](std::size_t line, std::string_view text) {
    const auto f = split_csv(text);
    if (f.size() != 6) {
      fail_line(line, "expected 6 fields frame,gt_id,x,y,w,h, got " + std::to_string(f.size()));
    }
    GtEntry g;
    g.frame_index = parse_frame(f[0], line);
    g.gt_id = static_cast<int>(to_integer(f[1], line, "gt_id"));
    g.bbox = parse_box(f, 2, line);
    if (!seen.emplace(g.frame_index, g.gt_id).second) {
      fail_line(line, "duplicate (frame, gt_id) = (" + std::to_string(g.frame_index) + ", " +
                          std::to_string(g.gt_id) + ")");
    }
    out.push_back(g);
  });
  return out;
}

void write_gt(std::ostream& out, const std::vector<GtEntry>& gt) {
  for (const auto& g : gt) {
    out << g.frame_index << ',' << g.gt_id << ',';
    write_box(out, g.bbox);
    out << '\n';
  }
}

static constexpr std::string_view kTrackHeader = "frame,track_id,x,y,w,h,source";

std::vector<TrackRow> parse_tracks(std::istream& in) {
  std::vector<TrackRow> out;
  std::set<std::pair<int, TrackId>> seen;
  bool header = false;
  for_each_line(in, [&](std::size_t line, std::string_view text) {
    if (!header) {
      if (trim(text) != kTrackHeader) {
        fail_line(line, "expected header '" + std::string(kTrackHeader) + "'");
      }
      header = true;
      return;
    }
    const auto f = split_csv(text);
    if (f.size() != 7) fail_line(line, "expected 7 fields, got " + std::to_string(f.size()));
    TrackRow r;
    r.frame_index = parse_frame(f[0], line);
    r.track_id = to_integer(f[1], line, "track_id");
    r.bbox = parse_box(f, 2, line);
    if (f[6] == "O") {
      r.source = ObservationSource::Observed;
    } else if (f[6] == "H") {
      r.source = ObservationSource::Hypothetical;
    } else {
      fail_line(line, "source must be O or H");
    }
    if (!seen.emplace(r.frame_index, r.track_id).second) {
      fail_line(line, "track " + std::to_string(r.track_id) + " has two rows in frame " +
                          std::to_string(r.frame_index));
    }
    out.push_back(r);
  });
  return out;
}

void write_track_rows(std::ostream& out, const std::vector<TrackRow>& rows) {
  out << kTrackHeader << '\n';
  for (const auto& r : rows) {
    out << r.frame_index << ',' << r.track_id << ',';
    write_box(out, r.bbox);
    out << ',' << (r.source == ObservationSource::Observed ? 'O' : 'H') << '\n';
  }
}

void write_tracks(std::ostream& out, const std::vector<Track>& tracks) {
  write_track_rows(out, track_rows(tracks));
}

FeatureSidecar parse_features(std::istream& in) {
  FeatureSidecar out;
  bool first = true;
  for_each_line(in, [&](std::size_t line, std::string_view text) {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      fail_line(line, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) fail_line(line, "expected a JSON object");
    const bool is_first = first;
    first = false;
    if (j.contains("header")) {
      if (!is_first || j.size() != 1) fail_line(line, "header must be the first line, alone");
      out.header = j["header"].dump();
      return;
    }
    for (const auto& [key, value] : j.items()) {
      if (key != "frame" && key != "det" && key != "histogram" && key != "descriptors" &&
          key != "deep") {
        fail_line(line, "unknown key '" + key + "'");
      }
    }
    if (!j.contains("frame") || !j["frame"].is_number_integer()) {
      fail_line(line, "missing integer 'frame'");
    }
    if (!j.contains("det") || !j["det"].is_number_integer()) {
      fail_line(line, "missing integer 'det'");
    }
    const int frame = j["frame"].get<int>();
    const int det = j["det"].get<int>();
    if (frame < 1 || det < 0) fail_line(line, "frame must be >= 1 and det >= 0");

    FeatureBundle b;
    if (j.contains("histogram")) {
      b.histogram = json_numbers(j["histogram"], line, "histogram");
    }
    if (j.contains("descriptors")) {
      const auto& ds = j["descriptors"];
      if (!ds.is_array()) fail_line(line, "'descriptors' must be an array of arrays");
      b.descriptors.emplace();
      for (const auto& d : ds) {
        b.descriptors->push_back(json_numbers(d, line, "descriptors"));
        if (b.descriptors->back().size() != b.descriptors->front().size()) {
          fail_line(line, "ragged descriptor dimensions");
        }
      }
    }
    if (j.contains("deep")) b.deep_vector = json_numbers(j["deep"], line, "deep");
    try {
      validate(b);
    } catch (const Error& e) {
      fail_line(line, e.what());
    }
    if (!out.bundles.emplace(FeatureKey{frame, det}, std::move(b)).second) {
      fail_line(line, "duplicate (frame, det) = (" + std::to_string(frame) + ", " +
                          std::to_string(det) + ")");
    }
  });
  return out;
}

void write_features(std::ostream& out, const FeatureSidecar& sidecar) {
  if (sidecar.header) {
    json h;
    h["header"] = json::parse(*sidecar.header);
    out << h.dump() << '\n';
  }
  for (const auto& [key, b] : sidecar.bundles) {
    // Keys in fixed order so output is stable and diff-able.
    std::string line = "{\"frame\":" + std::to_string(key.first) +
                       ",\"det\":" + std::to_string(key.second);
    if (b.histogram) line += ",\"histogram\":" + json(*b.histogram).dump();
    if (b.descriptors) line += ",\"descriptors\":" + json(*b.descriptors).dump();
    if (b.deep_vector) line += ",\"deep\":" + json(*b.deep_vector).dump();
    out << line << "}\n";
  }
}

void set_config_value(TrackerConfig& cfg, const std::string& key, const std::string& value) {
  auto num = [&] { return to_double(value, 0, key.c_str()); };
  auto integer = [&] { return static_cast<int>(to_integer(value, 0, key.c_str())); };
  try {
    if (key == "alpha") cfg.alpha = num();
    else if (key == "beta") cfg.beta = num();
    else if (key == "iou_prune_threshold") cfg.iou_prune_threshold = num();
    else if (key == "appearance_mode") cfg.appearance_mode = parse_appearance_mode(value);
    else if (key == "fps") cfg.fps = num();
    else if (key == "max_lost_frames") cfg.max_lost_frames = integer();
    else if (key == "border_margin_frac") cfg.border_margin_frac = num();
    else if (key == "hist_bins_per_channel") cfg.hist_bins_per_channel = integer();
    else if (key == "knn_ratio") cfg.knn_ratio = num();
    else if (key == "pca_fraction") cfg.pca_fraction = num();
    else if (key == "sift_match_normalization") cfg.sift_match_normalization = parse_bool(value);
    else if (key == "frame_width") cfg.frame_width = num();
    else if (key == "frame_height") cfg.frame_height = num();
    else if (key == "min_match_weight") cfg.min_match_weight = num();
    else if (key == "literal_fps_extrapolation") cfg.literal_fps_extrapolation = parse_bool(value);
    else if (key == "solver") {
      if (value == "exact") cfg.solver = MatchSolver::Exact;
      else if (value == "greedy") cfg.solver = MatchSolver::Greedy;
      else throw Error("solver must be exact or greedy");
    } else if (key == "pca_fit_frames") cfg.pca_fit_frames = integer();
    else if (key == "policy") {
      if (value == "serial") cfg.policy = ExecutionPolicy::Serial;
      else if (value == "parallel") cfg.policy = ExecutionPolicy::Parallel;
      else throw Error("policy must be serial or parallel");
    } else throw Error("unknown config key");
  } catch (const Error& e) {
    // Strip the "line 0: " prefix produced by the number helpers.
    std::string msg = e.what();
    if (msg.rfind("line 0: ", 0) == 0) msg.erase(0, 8);
    throw Error("config key '" + key + "': " + msg);
  }
}

TrackerConfig parse_config(std::istream& in, TrackerConfig base) {
  for_each_line(in, [&](std::size_t line, std::string_view raw) {
    std::string_view text = raw.substr(0, raw.find('#'));
    if (trim(text).empty()) return;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) fail_line(line, "expected 'key = value'");
    const std::string key(trim(text.substr(0, eq)));
    const std::string value(trim(text.substr(eq + 1)));
    try {
      set_config_value(base, key, value);
    } catch (const Error& e) {
      fail_line(line, e.what());
    }
  });
  return base;
}

void write_config(std::ostream& out, const TrackerConfig& c) {
  auto b = [](bool v) { return v ? "true" : "false"; };
  out << "alpha = " << format_number(c.alpha) << '\n'
      << "beta = " << format_number(c.beta) << '\n'
      << "iou_prune_threshold = " << format_number(c.iou_prune_threshold) << '\n'
      << "appearance_mode = " << to_string(c.appearance_mode) << '\n'
      << "fps = " << format_number(c.fps) << '\n'
      << "max_lost_frames = " << c.max_lost_frames << '\n'
      << "border_margin_frac = " << format_number(c.border_margin_frac) << '\n'
      << "hist_bins_per_channel = " << c.hist_bins_per_channel << '\n'
      << "knn_ratio = " << format_number(c.knn_ratio) << '\n'
      << "pca_fraction = " << format_number(c.pca_fraction) << '\n'
      << "sift_match_normalization = " << b(c.sift_match_normalization) << '\n'
      << "frame_width = " << format_number(c.frame_width) << '\n'
      << "frame_height = " << format_number(c.frame_height) << '\n'
      << "min_match_weight = " << format_number(c.min_match_weight) << '\n'
      << "literal_fps_extrapolation = " << b(c.literal_fps_extrapolation) << '\n'
      << "solver = " << (c.solver == MatchSolver::Exact ? "exact" : "greedy") << '\n'
      << "pca_fit_frames = " << c.pca_fit_frames << '\n'
      << "policy = " << (c.policy == ExecutionPolicy::Parallel ? "parallel" : "serial") << '\n';
}

SequenceBundle assemble_sequence(std::string name, const DetectionsByFrame& dets,
                                 const FeatureSidecar* features, double frame_width,
                                 double frame_height, int frame_count) {
  SequenceBundle seq;
  seq.name = std::move(name);
  seq.frame_width = frame_width;
  seq.frame_height = frame_height;
  seq.frame_count = std::max(frame_count, dets.empty() ? 0 : dets.rbegin()->first);
  seq.detections.resize(static_cast<std::size_t>(seq.frame_count));
  seq.features.resize(static_cast<std::size_t>(seq.frame_count));
  for (const auto& [frame, list] : dets) {
    auto& out_dets = seq.detections[static_cast<std::size_t>(frame - 1)];
    auto& out_feats = seq.features[static_cast<std::size_t>(frame - 1)];
    for (const auto& d : list) {
      out_dets.push_back(d);
      FeatureBundle b;
      if (features) {
        auto it = features->bundles.find({d.frame_index, d.det_index});
        if (it != features->bundles.end()) b = it->second;
      }
      out_feats.push_back(std::move(b));
    }
  }
  return seq;
}

DetectionsByFrame detections_by_frame(const SequenceBundle& seq) {
  DetectionsByFrame out;
  for (const auto& frame : seq.detections) {
    for (const auto& d : frame) out[d.frame_index].push_back(d);
  }
  return out;
}

FeatureSidecar features_of(const SequenceBundle& seq) {
  FeatureSidecar out;
  for (std::size_t f = 0; f < seq.detections.size() && f < seq.features.size(); ++f) {
    for (std::size_t i = 0; i < seq.detections[f].size() && i < seq.features[f].size(); ++i) {
      const auto& d = seq.detections[f][i];
      if (!seq.features[f][i].empty()) {
        out.bundles.emplace(FeatureKey{d.frame_index, d.det_index}, seq.features[f][i]);
      }
    }
  }
  return out;
}

}  // namespace trackgraph
