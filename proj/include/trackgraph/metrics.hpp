#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trackgraph/core_model.hpp"
#include "trackgraph/sequence.hpp"

namespace trackgraph {

/// Minimum IOU for a ground-truth object and a hypothesis to correspond.
inline constexpr double kClearIouThreshold = 0.5;

struct Hypothesis {
  TrackId track_id = 0;
  BoundingBox bbox;
};

struct FrameAssignment {
  /// (gt_id, track_id), sorted by gt_id.
  std::vector<std::pair<int, TrackId>> matches;
  int fp = 0;
  int fn = 0;
  int idsw = 0;
};

/// One frame of CLEAR-MOT correspondence. `last_match` maps each gt_id to
/// the track it was matched with the last time it was matched at all.
/// Surviving correspondences (IOU >= 0.5) are kept first; the rest are
/// assigned by maximum total IOU.
FrameAssignment assign_frame(std::span<const GtEntry> gt, std::span<const Hypothesis> hyp,
                             const std::map<int, TrackId>& last_match);

struct MetricsReport {
  long fp = 0;
  long fn = 0;
  long idsw = 0;
  long gt_total = 0;
  double mota = 0.0;
};

/// 1 - (fn + fp + idsw) / gt_total. Throws when gt_total is 0.
double mota(long fn, long fp, long idsw, long gt_total);

class MetricsAccumulator {
public:
  FrameAssignment add_frame(std::span<const GtEntry> gt, std::span<const Hypothesis> hyp);

  /// Throws when no ground truth has been seen.
  MetricsReport report() const;

  long fp() const { return fp_; }
  long fn() const { return fn_; }
  long idsw() const { return idsw_; }
  long gt_total() const { return gt_total_; }

private:
  std::map<int, TrackId> last_match_;
  long fp_ = 0;
  long fn_ = 0;
  long idsw_ = 0;
  long gt_total_ = 0;
};

/// Scores a whole sequence. Frames are the union of those present in either
/// stream. Hypothetical rows are skipped when include_hypothetical is false.
MetricsReport evaluate(const std::vector<GtEntry>& gt, const std::vector<TrackRow>& hyp,
                       bool include_hypothetical = true);

/// Aligned table with MOTA, FP, FN, IDSW columns.
std::string format_report_table(const MetricsReport& r, const std::string& label);

/// key=value lines: mota, fp, fn, idsw, gt_total.
std::string format_report_kv(const MetricsReport& r);

}  // namespace trackgraph
