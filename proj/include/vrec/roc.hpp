#pragma once

#include <span>
#include <vector>

namespace vrec {

// One frame for no-referred-object discrimination: the top-1 confidence and
// whether the referred object is in the image (the positive class).
struct ScoredLabel {
  double score = 0.0;
  bool has_target = false;
};

struct RocPoint {
  // Frames with score >= threshold are called positive. The first point of a
  // curve uses +infinity.
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

// Sweeps every distinct score from high to low. Tied scores move the curve
// diagonally, so the trapezoidal area equals the Mann-Whitney statistic with
// half credit for ties. Throws ErrorCode::kDegenerateLabels when one class
// is missing.
RocCurve roc_curve(std::span<const ScoredLabel> samples);

}  // namespace vrec
