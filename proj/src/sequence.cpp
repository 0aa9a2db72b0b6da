#include "trackgraph/sequence.hpp"

#include <algorithm>
#include <tuple>

namespace trackgraph {

std::vector<TrackRow> track_rows(const std::vector<Track>& tracks) {
  std::vector<TrackRow> rows;
  for (const auto& t : tracks) {
    for (const auto& o : t.observations) rows.push_back({o.frame_index, t.id, o.bbox, o.source});
  }
  std::sort(rows.begin(), rows.end(), [](const TrackRow& a, const TrackRow& b) {
    return std::tie(a.frame_index, a.track_id) < std::tie(b.frame_index, b.track_id);
  });
  return rows;
}

}  // namespace trackgraph
