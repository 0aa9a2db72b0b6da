#include "trackgraph/track_manager.hpp"

#include <algorithm>
#include <memory>
#include <string>

namespace trackgraph {

Point center(const BoundingBox& b) { return {b.x + b.w / 2.0, b.y + b.h / 2.0}; }

Point velocity(const Track& t, const TrackerConfig& cfg) {
  if (t.observations.size() < 2) return {0.0, 0.0};
  const Point first = center(t.observations.front().bbox);
  const Point latest = center(t.observations.back().bbox);
  const int s = t.observations.front().frame_index;
  const int m = t.observations.back().frame_index + 1;
  const double elapsed = static_cast<double>(m - s) / cfg.fps;
  return {(latest.x - first.x) / elapsed, (latest.y - first.y) / elapsed};
}

BoundingBox predict_position(const Track& t, const TrackerConfig& cfg) {
  const BoundingBox& last = t.last().bbox;
  const Point v = velocity(t, cfg);
  const double scale = cfg.literal_fps_extrapolation ? cfg.fps : 1.0 / cfg.fps;
  const Point c = center(last);
  const Point moved{c.x + v.x * scale, c.y + v.y * scale};
  return {moved.x - last.w / 2.0, moved.y - last.h / 2.0, last.w, last.h};
}

TrackState classify_missing(const Track& t, const TrackerConfig& cfg) {
  if (t.lost_count >= cfg.max_lost_frames) return TrackState::Left;
  const Point c = center(t.last().bbox);
  const double mx = cfg.border_margin_frac * cfg.frame_width;
  const double my = cfg.border_margin_frac * cfg.frame_height;
  const bool near_border = c.x < mx || c.x > cfg.frame_width - mx || c.y < my ||
                           c.y > cfg.frame_height - my;
  return near_border ? TrackState::Left : TrackState::Lost;
}

Observation spawn_hypothetical(Track& t, const TrackerConfig& cfg) {
  Observation obs{t.last().frame_index + 1, predict_position(t, cfg),
                  ObservationSource::Hypothetical};
  t.observations.push_back(obs);
  ++t.lost_count;
  return obs;
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::Born: return "Born";
    case EventKind::Extended: return "Extended";
    case EventKind::Recovered: return "Recovered";
    case EventKind::Lost: return "Lost";
    case EventKind::Left: return "Left";
  }
  return "?";
}

TrackerEngine::TrackerEngine(TrackerConfig cfg, std::optional<PcaBasis> basis)
    : cfg_(cfg), basis_(std::move(basis)) {
  cfg_.validate();
  if (cfg_.appearance_mode == AppearanceMode::Deep && !basis_) {
    throw Error("deep appearance mode requires a fitted PCA basis");
  }
}

std::size_t TrackerEngine::active_count() const {
  return static_cast<std::size_t>(
      std::count_if(tracks_.begin(), tracks_.end(), [](const Track& t) { return t.active(); }));
}

StepResult TrackerEngine::step(const std::vector<Detection>& detections,
                               const std::vector<FeatureBundle>& features) {
  const int frame = current_frame_ + 1;
  for (const auto& d : detections) {
    if (d.frame_index != frame) {
      throw Error("step: detection carries frame " + std::to_string(d.frame_index) +
                  ", engine expects frame " + std::to_string(frame));
    }
    require_valid(d.bbox, "step: frame " + std::to_string(frame) + " det " +
                              std::to_string(d.det_index));
  }
  const bool featureless = features.empty() && cfg_.appearance_mode == AppearanceMode::None;
  if (!featureless && features.size() != detections.size()) {
    throw Error("step: " + std::to_string(features.size()) + " feature bundles for " +
                std::to_string(detections.size()) + " detections");
  }

  std::vector<std::size_t> active;
  std::vector<GraphNode> prev_nodes;
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    if (!tracks_[i].active()) continue;
    active.push_back(i);
    prev_nodes.push_back(
        GraphNode::prev(tracks_[i].id, tracks_[i].last().bbox, tracks_[i].last_features));
  }
  std::vector<FeaturePtr> det_features(detections.size());
  std::vector<GraphNode> next_nodes;
  for (std::size_t j = 0; j < detections.size(); ++j) {
    if (!featureless) det_features[j] = std::make_shared<const FeatureBundle>(features[j]);
    next_nodes.push_back(GraphNode::next(detections[j], det_features[j]));
  }

  StepResult result;
  result.graph = build_graph(std::move(prev_nodes), std::move(next_nodes), cfg_,
                             basis_ ? &*basis_ : nullptr);
  result.matching = associate(result.graph, cfg_);

  std::vector<char> track_matched(active.size(), 0);
  std::vector<char> det_matched(detections.size(), 0);
  for (const auto& [p, n] : result.matching.pairs) {
    Track& t = tracks_[active[p]];
    const Detection& d = detections[n];
    track_matched[p] = 1;
    det_matched[n] = 1;
    const bool was_lost = t.state == TrackState::Lost;
    if (was_lost) t.state = transition(t.state, TrackState::Tracking);
    t.observations.push_back({frame, d.bbox, ObservationSource::Observed});
    t.lost_count = 0;
    t.last_features = det_features[n];
    result.events.push_back(
        {was_lost ? EventKind::Recovered : EventKind::Extended, t.id, frame, d.det_index});
  }

  for (std::size_t p = 0; p < active.size(); ++p) {
    if (track_matched[p]) continue;
    Track& t = tracks_[active[p]];
    if (classify_missing(t, cfg_) == TrackState::Left) {
      t.state = transition(t.state, TrackState::Left);
      t.left_frame = frame;
      result.events.push_back({EventKind::Left, t.id, frame, std::nullopt});
      continue;
    }
    if (t.state == TrackState::Tracking) {
      t.state = transition(t.state, TrackState::Lost);
      result.events.push_back({EventKind::Lost, t.id, frame, std::nullopt});
    }
    spawn_hypothetical(t, cfg_);
  }

  for (std::size_t n = 0; n < detections.size(); ++n) {
    if (det_matched[n]) continue;
    Track t;
    t.id = next_track_id_++;
    t.observations.push_back({frame, detections[n].bbox, ObservationSource::Observed});
    t.first_frame = frame;
    t.last_features = det_features[n];
    tracks_.push_back(std::move(t));
    result.events.push_back({EventKind::Born, tracks_.back().id, frame, detections[n].det_index});
  }

  current_frame_ = frame;
  return result;
}

PcaBasis fit_sequence_basis(const SequenceBundle& seq, const TrackerConfig& cfg) {
  std::vector<std::vector<double>> samples;
  const int limit = std::min(seq.frame_count, cfg.pca_fit_frames);
  for (int f = 0; f < limit && f < static_cast<int>(seq.features.size()); ++f) {
    for (const auto& bundle : seq.features[static_cast<std::size_t>(f)]) {
      if (bundle.deep_vector) samples.push_back(*bundle.deep_vector);
    }
  }
  if (samples.size() < 2) {
    throw Error("deep appearance: need at least 2 deep vectors in the first " +
                std::to_string(cfg.pca_fit_frames) + " frames to fit PCA, found " +
                std::to_string(samples.size()));
  }
  return pca_fit(samples, cfg.pca_fraction, cfg.policy);
}

SequenceResult run_sequence(const SequenceBundle& seq, TrackerConfig cfg, bool keep_steps) {
  cfg.frame_width = seq.frame_width;
  cfg.frame_height = seq.frame_height;
  std::optional<PcaBasis> basis;
  if (cfg.appearance_mode == AppearanceMode::Deep) basis = fit_sequence_basis(seq, cfg);
  TrackerEngine engine(cfg, std::move(basis));

  SequenceResult out;
  static const std::vector<Detection> no_detections;
  static const std::vector<FeatureBundle> no_features;
  for (int f = 1; f <= seq.frame_count; ++f) {
    const auto idx = static_cast<std::size_t>(f - 1);
    const auto& dets = idx < seq.detections.size() ? seq.detections[idx] : no_detections;
    const auto& feats = idx < seq.features.size() ? seq.features[idx] : no_features;
    auto step = engine.step(dets, feats);
    out.events.insert(out.events.end(), step.events.begin(), step.events.end());
    if (keep_steps) out.steps.push_back(std::move(step));
  }
  out.tracks = engine.tracks();
  return out;
}

}  // namespace trackgraph
