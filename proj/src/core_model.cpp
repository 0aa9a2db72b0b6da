#include "trackgraph/core_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace trackgraph {

bool is_valid(const BoundingBox& b) {
  return std::isfinite(b.x) && std::isfinite(b.y) && std::isfinite(b.w) &&
         std::isfinite(b.h) && b.w > 0.0 && b.h > 0.0;
}

void require_valid(const BoundingBox& b, std::string_view what) {
  if (!is_valid(b)) {
    std::ostringstream os;
    os << what << ": invalid box (" << b.x << ", " << b.y << ", " << b.w << ", "
       << b.h << "); width and height must be positive and finite";
    throw Error(os.str());
  }
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  // x + w - x need not round back to w, so equal boxes are special-cased.
  if (a == b) {
    return 1.0;
  }
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) {
    return 0.0;
  }
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (inter >= uni) {
    return 1.0;
  }
  return inter / uni;
}

void validate(const FeatureBundle& f) {
  if (f.histogram) {
    for (double v : *f.histogram) {
      if (!std::isfinite(v) || v < 0.0) {
        throw Error("histogram entries must be finite and non-negative");
      }
    }
  }
  if (f.descriptors && !f.descriptors->empty()) {
    const std::size_t dim = f.descriptors->front().size();
    for (const auto& d : *f.descriptors) {
      if (d.size() != dim) {
        throw Error("descriptors in one bundle must share one dimension");
      }
    }
  }
}

std::string_view to_string(TrackState s) {
  switch (s) {
    case TrackState::Tracking: return "Tracking";
    case TrackState::Lost: return "Lost";
    case TrackState::Left: return "Left";
  }
  return "?";
}

bool is_legal_transition(TrackState from, TrackState to) {
  switch (from) {
    case TrackState::Tracking:
      return to == TrackState::Lost || to == TrackState::Left;
    case TrackState::Lost:
      return to == TrackState::Tracking || to == TrackState::Left;
    case TrackState::Left:
      return false;
  }
  return false;
}

TrackState transition(TrackState from, TrackState to) {
  if (!is_legal_transition(from, to)) {
    throw Error("illegal track state transition " + std::string(to_string(from)) +
                " -> " + std::string(to_string(to)));
  }
  return to;
}

std::string_view to_string(AppearanceMode m) {
  switch (m) {
    case AppearanceMode::SiftHist: return "sift";
    case AppearanceMode::Deep: return "deep";
    case AppearanceMode::None: return "none";
  }
  return "?";
}

AppearanceMode parse_appearance_mode(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "sift" || lower == "sifthist") return AppearanceMode::SiftHist;
  if (lower == "deep") return AppearanceMode::Deep;
  if (lower == "none") return AppearanceMode::None;
  throw Error("unknown appearance mode '" + std::string(s) + "' (expected sift, deep or none)");
}

void TrackerConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error("config: " + msg); };
  if (!(alpha >= 0.0)) fail("alpha must be >= 0");
  if (!(beta >= 0.0)) fail("beta must be >= 0");
  if (!(alpha + beta > 0.0)) fail("alpha + beta must be > 0");
  if (!(iou_prune_threshold >= 0.0 && iou_prune_threshold <= 1.0))
    fail("iou_prune_threshold must lie in [0, 1]");
  if (!(fps > 0.0)) fail("fps must be > 0");
  if (max_lost_frames < 0) fail("max_lost_frames must be >= 0");
  if (!(border_margin_frac >= 0.0 && border_margin_frac <= 0.5))
    fail("border_margin_frac must lie in [0, 0.5]");
  if (hist_bins_per_channel < 2) fail("hist_bins_per_channel must be >= 2");
  if (!(knn_ratio > 0.0 && knn_ratio <= 1.0)) fail("knn_ratio must lie in (0, 1]");
  if (!(pca_fraction > 0.0 && pca_fraction <= 1.0)) fail("pca_fraction must lie in (0, 1]");
  if (!(frame_width > 0.0)) fail("frame_width must be > 0");
  if (!(frame_height > 0.0)) fail("frame_height must be > 0");
  if (!(min_match_weight >= 0.0)) fail("min_match_weight must be >= 0");
  if (pca_fit_frames < 1) fail("pca_fit_frames must be >= 1");
}

}  // namespace trackgraph
