#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>

#include "vrec/tracker.hpp"

namespace vrec {

struct FrameSelection {
  BBox2D box;
  // Effective score of the selected candidate; unset for empty frames.
  std::optional<double> score;
  std::optional<std::size_t> detection_index;
  std::optional<int> track_id;
};

// Sets every track's fused_score to the arithmetic mean of its entry scores.
void assign_fused_scores(std::span<Track> tracks);

// Re-selects one box per frame. A tracked candidate's effective score is
// max(original, fused score of its track); untracked candidates keep their
// own score. The highest effective score wins (ties: earlier input index).
// Frames whose winner scores below no_object_threshold, and frames without
// candidates, come out Absent.
std::map<std::int64_t, FrameSelection> fuse_scores(
    TrackingResult& tracking, std::optional<double> no_object_threshold = std::nullopt);

}  // namespace vrec
