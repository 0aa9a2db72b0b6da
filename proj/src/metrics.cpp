#include "trackgraph/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>

#include "trackgraph/matching.hpp"

namespace trackgraph {

FrameAssignment assign_frame(std::span<const GtEntry> gt, std::span<const Hypothesis> hyp,
                             const std::map<int, TrackId>& last_match) {
  std::set<int> gt_ids;
  for (const auto& g : gt) {
    if (!gt_ids.insert(g.gt_id).second) {
      throw Error("assign_frame: duplicate gt_id " + std::to_string(g.gt_id));
    }
  }
  std::map<TrackId, std::size_t> hyp_at;
  for (std::size_t j = 0; j < hyp.size(); ++j) {
    if (!hyp_at.emplace(hyp[j].track_id, j).second) {
      throw Error("assign_frame: duplicate track_id " + std::to_string(hyp[j].track_id));
    }
  }

  std::vector<char> gt_taken(gt.size(), 0);
  std::vector<char> hyp_taken(hyp.size(), 0);
  std::vector<std::pair<int, TrackId>> matches;

  for (std::size_t i = 0; i < gt.size(); ++i) {
    auto prev = last_match.find(gt[i].gt_id);
    if (prev == last_match.end()) continue;
    auto h = hyp_at.find(prev->second);
    if (h == hyp_at.end() || hyp_taken[h->second]) continue;
    if (iou(gt[i].bbox, hyp[h->second].bbox) >= kClearIouThreshold) {
      gt_taken[i] = 1;
      hyp_taken[h->second] = 1;
      matches.emplace_back(gt[i].gt_id, prev->second);
    }
  }

  std::vector<std::size_t> rows, cols;
  for (std::size_t i = 0; i < gt.size(); ++i)
    if (!gt_taken[i]) rows.push_back(i);
  for (std::size_t j = 0; j < hyp.size(); ++j)
    if (!hyp_taken[j]) cols.push_back(j);
  std::vector<Edge> edges;
  for (std::size_t a = 0; a < rows.size(); ++a) {
    for (std::size_t b = 0; b < cols.size(); ++b) {
      const double o = iou(gt[rows[a]].bbox, hyp[cols[b]].bbox);
      if (o >= kClearIouThreshold) edges.push_back({a, b, o});
    }
  }
  const Matching m = max_weight_matching(rows.size(), cols.size(), edges, kClearIouThreshold);
  for (const auto& [a, b] : m.pairs) {
    matches.emplace_back(gt[rows[a]].gt_id, hyp[cols[b]].track_id);
  }

  std::sort(matches.begin(), matches.end());
  FrameAssignment out;
  out.fn = static_cast<int>(gt.size() - matches.size());
  out.fp = static_cast<int>(hyp.size() - matches.size());
  for (const auto& [g, t] : matches) {
    auto prev = last_match.find(g);
    if (prev != last_match.end() && prev->second != t) ++out.idsw;
  }
  out.matches = std::move(matches);
  return out;
}

double mota(long fn, long fp, long idsw, long gt_total) {
  if (gt_total <= 0) throw Error("MOTA is undefined without ground truth objects");
  return 1.0 - static_cast<double>(fn + fp + idsw) / static_cast<double>(gt_total);
}

FrameAssignment MetricsAccumulator::add_frame(std::span<const GtEntry> gt,
                                              std::span<const Hypothesis> hyp) {
  FrameAssignment a = assign_frame(gt, hyp, last_match_);
  for (const auto& [g, t] : a.matches) last_match_[g] = t;
  fp_ += a.fp;
  fn_ += a.fn;
  idsw_ += a.idsw;
  gt_total_ += static_cast<long>(gt.size());
  return a;
}

MetricsReport MetricsAccumulator::report() const {
  return {fp_, fn_, idsw_, gt_total_, mota(fn_, fp_, idsw_, gt_total_)};
}

MetricsReport evaluate(const std::vector<GtEntry>& gt, const std::vector<TrackRow>& hyp,
                       bool include_hypothetical) {
  std::map<int, std::pair<std::vector<GtEntry>, std::vector<Hypothesis>>> frames;
  for (const auto& g : gt) frames[g.frame_index].first.push_back(g);
  for (const auto& h : hyp) {
    if (!include_hypothetical && h.source == ObservationSource::Hypothetical) continue;
    frames[h.frame_index].second.push_back({h.track_id, h.bbox});
  }
  MetricsAccumulator acc;
  for (const auto& [frame, data] : frames) {
    try {
      acc.add_frame(data.first, data.second);
    } catch (const Error& e) {
      throw Error("frame " + std::to_string(frame) + ": " + e.what());
    }
  }
  return acc.report();
}

std::string format_report_table(const MetricsReport& r, const std::string& label) {
  const std::size_t width = std::max<std::size_t>(label.size(), 8);
  char line[256];
  std::ostringstream os;
  std::snprintf(line, sizeof line, "%-*s %8s %8s %8s %8s %8s\n", static_cast<int>(width),
                "Method", "MOTA", "FP", "FN", "IDSW", "GT");
  os << line;
  std::snprintf(line, sizeof line, "%-*s %8.4f %8ld %8ld %8ld %8ld\n", static_cast<int>(width),
                label.c_str(), r.mota, r.fp, r.fn, r.idsw, r.gt_total);
  os << line;
  return os.str();
}

std::string format_report_kv(const MetricsReport& r) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", r.mota);
  std::ostringstream os;
  os << "mota=" << buf << "\n"
     << "fp=" << r.fp << "\n"
     << "fn=" << r.fn << "\n"
     << "idsw=" << r.idsw << "\n"
     << "gt_total=" << r.gt_total << "\n";
  return os.str();
}

}  // namespace trackgraph
