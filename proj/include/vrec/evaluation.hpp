#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vrec/json_io.hpp"
#include "vrec/metrics.hpp"
#include "vrec/roc.hpp"

namespace vrec {

// Highest-scoring box of a frame (missing scores count as 0, ties keep the
// earlier box); Absent for an empty frame.
PredictedBox top1(const PredictedFrame& frame);

// Pairs every annotated clip with its predictions, keeping annotated frames
// only. Throws ErrorCode::kMissingClip when predictions name clips that are
// not annotated. Annotated clips without predictions are evaluated as
// all-Absent and reported in `warnings`.
std::vector<ClipEvaluation> pair_clips(const AnnotationFile& annotations,
                                       const PredictionFile& predictions,
                                       std::vector<std::string>* warnings = nullptr);

// One sample per frame: top-1 score (0 when missing or Absent) against
// whether the annotation is Present.
std::vector<ScoredLabel> roc_samples(const std::vector<ClipEvaluation>& clips);

enum class GroupBy { kUniqueness, kMovement };

struct EvaluationReport {
  SplitReport split;
  std::optional<GroupBy> group_by;
  // Tag value -> report over the clips carrying it.
  std::map<std::string, SplitReport> groups;
  std::vector<ClipMetrics> clips;
};

// Clip metrics are computed on up to `threads` workers; results are merged
// in clip_id order.
EvaluationReport evaluate_split(const std::vector<ClipEvaluation>& clips,
                                Aggregation aggregation,
                                std::optional<GroupBy> group_by = std::nullopt,
                                int threads = 1);

Json to_json(const EvaluationReport& report);

}  // namespace vrec
