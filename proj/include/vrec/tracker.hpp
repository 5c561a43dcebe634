#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "vrec/box.hpp"
#include "vrec/kalman.hpp"

namespace vrec {

// Association thresholds. Defaults are the published ByteTrack settings for
// REC confidences; max_lost_frames is one second at 30 fps.
struct TrackerConfig {
  double track_high_thresh = 0.1;
  double track_low_thresh = -0.5;
  double match_score_thresh = 0.9;
  double match_giou_thresh = 0.9;
  double nms_iou_thresh = kDefaultNmsIouThreshold;
  int max_lost_frames = 30;
  // When set only the strict gate (score > match_score_thresh and
  // GIoU > match_giou_thresh) may link a detection to a track. Otherwise
  // strict pairs are linked first and any remaining pair with GIoU > 0 may
  // link afterwards.
  bool strict_gate_only = false;

  void validate() const;
};

struct Detection {
  std::int64_t frame_index = 0;
  BBox2D box;
  // REC confidence, nominally in [0,1]; association thresholds may be
  // negative so any finite value is accepted.
  double score = 0.0;
};

enum class TrackStatus { kActive, kLost, kRemoved };

struct TrackEntry {
  std::int64_t frame_index = 0;
  BBox2D box;
  double score = 0.0;
  // Index of the detection inside its frame's input list.
  std::size_t detection_index = 0;
};

struct Track {
  int track_id = 0;
  std::vector<TrackEntry> entries;
  KalmanState state;
  TrackStatus status = TrackStatus::kActive;
  std::optional<double> fused_score;
  // Frame the Kalman state refers to.
  std::int64_t state_frame = 0;

  std::int64_t last_frame() const { return entries.back().frame_index; }
};

enum class MatchStage { kHighScore, kLowScore };

struct Match {
  std::size_t track = 0;
  std::size_t detection = 0;
  MatchStage stage = MatchStage::kHighScore;
  double giou = 0.0;
  bool strict = false;
};

struct Association {
  std::vector<Match> matches;
  // Track indices left without a detection.
  std::vector<std::size_t> unmatched_tracks;
  // Unmatched high-score detections; each starts a new track.
  std::vector<std::size_t> new_tracks;
};

// Two-stage association for one frame. `tracks` must already be predicted to
// the frame of `detections`; Removed tracks are ignored. Pairs are linked
// greedily by descending GIoU, ties broken by (score desc, input order) of
// the detection and then by track order.
Association associate_frame(std::span<const Track> tracks,
                            std::span<const Detection> detections,
                            const TrackerConfig& cfg);

class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg);

  // Frames must arrive in strictly increasing order. Detections are used as
  // given; run_tracker applies NMS beforehand.
  void step(std::int64_t frame_index, std::span<const Detection> detections);

  const std::vector<Track>& tracks() const { return tracks_; }
  std::vector<Track> release() { return std::move(tracks_); }

 private:
  TrackerConfig cfg_;
  std::vector<Track> tracks_;
  std::optional<std::int64_t> last_frame_;
  int next_id_ = 1;
};

struct Candidate {
  std::size_t detection_index = 0;
  BBox2D box;
  double score = 0.0;
  std::optional<int> track_id;
};

struct TrackingResult {
  std::vector<Track> tracks;
  // NMS survivors of every frame, in input order.
  std::map<std::int64_t, std::vector<Candidate>> candidates;
};

using DetectionStream = std::map<std::int64_t, std::vector<Detection>>;

TrackingResult run_tracker(const DetectionStream& stream, const TrackerConfig& cfg);

}  // namespace vrec
