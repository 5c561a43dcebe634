#include "vrec/roc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vrec/errors.hpp"

namespace vrec {

RocCurve roc_curve(std::span<const ScoredLabel> samples) {
  std::vector<ScoredLabel> sorted(samples.begin(), samples.end());
  std::size_t n_pos = 0;
  for (const auto& s : sorted) {
    if (!std::isfinite(s.score)) {
      throw Error(ErrorCode::kInvalidArgument, "ROC score is not finite");
    }
    if (s.has_target) ++n_pos;
  }
  const std::size_t n_neg = sorted.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw Error(ErrorCode::kDegenerateLabels,
                "ROC needs at least one frame with and one without the target");
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });

  RocCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  std::size_t prev_tp = 0, prev_fp = 0;
  // Twice the area in units of one (positive, negative) pair.
  double area2 = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double threshold = sorted[i].score;
    for (; i < sorted.size() && sorted[i].score == threshold; ++i) {
      if (sorted[i].has_target) {
        ++tp;
      } else {
        ++fp;
      }
    }
    curve.points.push_back({threshold,
                            static_cast<double>(fp) / static_cast<double>(n_neg),
                            static_cast<double>(tp) / static_cast<double>(n_pos)});
    area2 += static_cast<double>(fp - prev_fp) * static_cast<double>(tp + prev_tp);
    prev_tp = tp;
    prev_fp = fp;
  }
  curve.auc = area2 / (2.0 * static_cast<double>(n_pos) * static_cast<double>(n_neg));
  return curve;
}

}  // namespace vrec
