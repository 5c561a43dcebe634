#include "vrec/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "vrec/errors.hpp"

namespace vrec {

void TrackerConfig::validate() const {
  if (!(track_low_thresh <= track_high_thresh)) {
    throw Error(ErrorCode::kInvalidArgument,
                "track_low_thresh must not exceed track_high_thresh");
  }
  if (max_lost_frames < 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_lost_frames must be >= 0");
  }
  if (!(nms_iou_thresh >= 0.0 && nms_iou_thresh <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "nms_iou_thresh must lie in [0,1]");
  }
}

namespace {

struct Pair {
  std::size_t track;
  std::size_t detection;
  std::size_t detection_rank;
  double giou;
  bool strict;
};

// Greedy one-to-one linking of the eligible pairs.
void link_greedy(std::vector<Pair> pairs, MatchStage stage,
                 std::vector<bool>& track_used, std::vector<bool>& det_used,
                 std::vector<Match>& out) {
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return std::tie(b.giou, a.detection_rank, a.track) <
           std::tie(a.giou, b.detection_rank, b.track);
  });
  for (const Pair& p : pairs) {
    if (track_used[p.track] || det_used[p.detection]) continue;
    track_used[p.track] = true;
    det_used[p.detection] = true;
    out.push_back({p.track, p.detection, stage, p.giou, p.strict});
  }
}

void match_stage(std::span<const Track> tracks, std::span<const Detection> dets,
                 const std::vector<std::size_t>& track_pool,
                 const std::vector<std::size_t>& det_pool,
                 const std::vector<std::size_t>& det_rank,
                 const TrackerConfig& cfg, MatchStage stage,
                 std::vector<bool>& track_used, std::vector<bool>& det_used,
                 std::vector<Match>& out) {
  std::vector<Pair> strict;
  std::vector<Pair> permissive;
  for (const std::size_t t : track_pool) {
    if (track_used[t]) continue;
    const BBox2D predicted = tracks[t].state.box();
    if (!predicted.present()) continue;
    for (const std::size_t d : det_pool) {
      if (det_used[d]) continue;
      const double g = giou(predicted, dets[d].box);
      if (dets[d].score > cfg.match_score_thresh && g > cfg.match_giou_thresh) {
        strict.push_back({t, d, det_rank[d], g, true});
      } else if (!cfg.strict_gate_only && g > 0.0) {
        permissive.push_back({t, d, det_rank[d], g, false});
      }
    }
  }
  link_greedy(std::move(strict), stage, track_used, det_used, out);
  link_greedy(std::move(permissive), stage, track_used, det_used, out);
}

}  // namespace

Association associate_frame(std::span<const Track> tracks,
                            std::span<const Detection> detections,
                            const TrackerConfig& cfg) {
  // Rank detections by (score desc, input order).
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].score > detections[b].score;
  });
  std::vector<std::size_t> rank(detections.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;

  std::vector<std::size_t> high, low;
  for (const std::size_t d : order) {
    if (!detections[d].box.present()) {
      throw Error(ErrorCode::kAbsentInput, "detections must carry a Present box");
    }
    if (detections[d].score >= cfg.track_high_thresh) {
      high.push_back(d);
    } else if (detections[d].score >= cfg.track_low_thresh) {
      low.push_back(d);
    }
  }

  std::vector<std::size_t> live, active;
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    if (tracks[t].status == TrackStatus::kRemoved) continue;
    live.push_back(t);
    if (tracks[t].status == TrackStatus::kActive) active.push_back(t);
  }

  Association result;
  std::vector<bool> track_used(tracks.size(), false);
  std::vector<bool> det_used(detections.size(), false);
  match_stage(tracks, detections, live, high, rank, cfg, MatchStage::kHighScore,
              track_used, det_used, result.matches);
  match_stage(tracks, detections, active, low, rank, cfg, MatchStage::kLowScore,
              track_used, det_used, result.matches);

  for (const std::size_t t : live) {
    if (!track_used[t]) result.unmatched_tracks.push_back(t);
  }
  for (const std::size_t d : high) {
    if (!det_used[d]) result.new_tracks.push_back(d);
  }
  return result;
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void Tracker::step(std::int64_t frame_index, std::span<const Detection> detections) {
  if (last_frame_ && frame_index <= *last_frame_) {
    throw Error(ErrorCode::kInvalidArgument, "frames must be strictly increasing");
  }
  last_frame_ = frame_index;

  for (Track& track : tracks_) {
    if (track.status == TrackStatus::kRemoved) continue;
    KalmanState state = track.state;
    // Lost tracks stop growing or shrinking.
    if (track.status == TrackStatus::kLost) state.mean(7) = 0.0;
    track.state = kalman_predict(state, static_cast<int>(frame_index - track.state_frame));
    track.state_frame = frame_index;
  }

  const Association assoc = associate_frame(tracks_, detections, cfg_);
  for (const Match& m : assoc.matches) {
    Track& track = tracks_[m.track];
    const Detection& det = detections[m.detection];
    track.state = kalman_update(track.state, det.box);
    track.entries.push_back({frame_index, det.box, det.score, m.detection});
    track.status = TrackStatus::kActive;
  }
  for (const std::size_t t : assoc.unmatched_tracks) {
    Track& track = tracks_[t];
    track.status = frame_index - track.last_frame() > cfg_.max_lost_frames
                       ? TrackStatus::kRemoved
                       : TrackStatus::kLost;
  }
  for (const std::size_t d : assoc.new_tracks) {
    Track track;
    track.track_id = next_id_++;
    track.state = kalman_initiate(detections[d].box);
    track.state_frame = frame_index;
    track.entries.push_back({frame_index, detections[d].box, detections[d].score, d});
    tracks_.push_back(std::move(track));
  }
}

TrackingResult run_tracker(const DetectionStream& stream, const TrackerConfig& cfg) {
  Tracker tracker(cfg);
  TrackingResult result;
  std::map<std::int64_t, std::vector<std::size_t>> kept_indices;

  for (const auto& [frame_index, detections] : stream) {
    std::vector<ScoredBox> scored;
    scored.reserve(detections.size());
    for (const Detection& d : detections) {
      if (!std::isfinite(d.score)) {
        throw Error(ErrorCode::kInvalidArgument, "detection score is not finite");
      }
      scored.push_back({d.box, d.score});
    }
    std::vector<std::size_t> kept = nms_indices(scored, cfg.nms_iou_thresh);
    std::sort(kept.begin(), kept.end());

    std::vector<Detection> survivors;
    std::vector<Candidate>& candidates = result.candidates[frame_index];
    for (const std::size_t i : kept) {
      survivors.push_back(detections[i]);
      survivors.back().frame_index = frame_index;
      candidates.push_back({i, detections[i].box, detections[i].score, std::nullopt});
    }
    tracker.step(frame_index, survivors);
    kept_indices[frame_index] = std::move(kept);
  }

  result.tracks = tracker.release();
  for (Track& track : result.tracks) {
    for (TrackEntry& entry : track.entries) {
      const std::size_t local = entry.detection_index;
      entry.detection_index = kept_indices[entry.frame_index][local];
      result.candidates[entry.frame_index][local].track_id = track.track_id;
    }
  }
  return result;
}

}  // namespace vrec
