#include "vrec/fusion.hpp"

#include <algorithm>
#include <unordered_map>

namespace vrec {

void assign_fused_scores(std::span<Track> tracks) {
  for (Track& track : tracks) {
    if (track.entries.empty()) {
      track.fused_score.reset();
      continue;
    }
    double sum = 0.0;
    for (const TrackEntry& e : track.entries) sum += e.score;
    track.fused_score = sum / static_cast<double>(track.entries.size());
  }
}

std::map<std::int64_t, FrameSelection> fuse_scores(
    TrackingResult& tracking, std::optional<double> no_object_threshold) {
  assign_fused_scores(tracking.tracks);
  std::unordered_map<int, double> fused;
  for (const Track& track : tracking.tracks) {
    if (track.fused_score) fused[track.track_id] = *track.fused_score;
  }

  std::map<std::int64_t, FrameSelection> out;
  for (const auto& [frame_index, candidates] : tracking.candidates) {
    FrameSelection& sel = out[frame_index];
    const Candidate* best = nullptr;
    double best_score = 0.0;
    for (const Candidate& c : candidates) {
      double effective = c.score;
      if (c.track_id) {
        if (auto it = fused.find(*c.track_id); it != fused.end()) {
          effective = std::max(effective, it->second);
        }
      }
      if (best == nullptr || effective > best_score ||
          (effective == best_score && c.detection_index < best->detection_index)) {
        best = &c;
        best_score = effective;
      }
    }
    if (best == nullptr) continue;
    if (no_object_threshold && best_score < *no_object_threshold) continue;
    sel.box = best->box;
    sel.score = best_score;
    sel.detection_index = best->detection_index;
    sel.track_id = best->track_id;
  }
  return out;
}

}  // namespace vrec
