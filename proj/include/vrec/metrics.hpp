#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vrec/box.hpp"

namespace vrec {

// IoU extended to frames without the target: 1 when both boxes are Absent,
// plain IoU otherwise.
double iou_plus_n(const BBox2D& pred, const BBox2D& gt);

// Threshold for AP@50 hits. The comparison is strict.
inline constexpr double kApIouThreshold = 0.5;

enum class Uniqueness { kSingle, kMultiple };
enum class Movement { kStatic, kMoving };

struct ClipTags {
  std::optional<Uniqueness> uniqueness;
  std::optional<Movement> movement;

  friend bool operator==(const ClipTags&, const ClipTags&) = default;
};

struct FrameRecord {
  std::int64_t frame_index = 0;
  BBox2D gt;
  BBox2D pred;
  std::optional<double> pred_score;
};

struct ClipEvaluation {
  std::string clip_id;
  std::vector<FrameRecord> frames;
  ClipTags tags;

  // Throws ErrorCode::kInvalidArgument for an empty clip or repeated
  // frame indices.
  void validate() const;
  std::size_t target_frame_count() const;
  // Annotated dataset clips carry the target in at least four frames.
  bool meets_dataset_minimum() const { return target_frame_count() >= 4; }
};

struct StiouResult {
  double value = 0.0;
  // Every frame had both boxes Absent; value is reported as 1.
  bool vacuous = false;
};

StiouResult stiou(const ClipEvaluation& clip);

struct ClipMetrics {
  std::string clip_id;
  ClipTags tags;
  double stiou = 0.0;
  bool stiou_vacuous = false;
  // Means over frames whose annotation is Present; unset when there are none.
  std::optional<double> mean_iou;
  std::optional<double> ap50;
  // Means over all frames with IoU+n.
  double mean_iou_plus_n = 0.0;
  double ap50_plus_n = 0.0;

  std::size_t n_frames = 0;
  std::size_t n_target_frames = 0;
  // Raw sums kept for image-pooled aggregation.
  double sum_iou = 0.0;
  std::size_t hits = 0;
  double sum_iou_plus_n = 0.0;
  std::size_t hits_plus_n = 0;
};

ClipMetrics clip_metrics(const ClipEvaluation& clip);

enum class Aggregation {
  // Per-image mean inside each clip, then unweighted mean over clips.
  kClipMean,
  // Every image weighted equally across the split.
  kPooledImages,
};

struct SplitReport {
  Aggregation aggregation = Aggregation::kClipMean;
  double mstiou = 0.0;
  double miou_plus_n = 0.0;
  double map50_plus_n = 0.0;
  // Unset when no clip has a target frame.
  std::optional<double> miou;
  std::optional<double> map50;
  std::size_t n_clips = 0;
  std::size_t n_images = 0;
  std::size_t n_images_with_target = 0;
  std::size_t n_vacuous_clips = 0;
};

// Folds clip records in clip_id order. Throws ErrorCode::kEmptySplit.
SplitReport split_aggregate(std::span<const ClipMetrics> clips,
                            Aggregation aggregation = Aggregation::kClipMean);

}  // namespace vrec
