#include "vrec/box.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "vrec/errors.hpp"

namespace vrec {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kBothAbsent: return "BothAbsent";
    case ErrorCode::kAbsentInput: return "AbsentInput";
    case ErrorCode::kDivergentUndistortion: return "DivergentUndistortion";
    case ErrorCode::kNonPositiveHeight: return "NonPositiveHeight";
    case ErrorCode::kEmptySplit: return "EmptySplit";
    case ErrorCode::kDegenerateLabels: return "DegenerateLabels";
    case ErrorCode::kUnregisteredFrame: return "UnregisteredFrame";
    case ErrorCode::kSingularBundle: return "SingularBundle";
    case ErrorCode::kTooFewInliers: return "TooFewInliers";
    case ErrorCode::kInsufficientViews: return "InsufficientViews";
    case ErrorCode::kLargeResidual: return "LargeResidual";
    case ErrorCode::kUnsupportedModel: return "UnsupportedModel";
    case ErrorCode::kMalformedLine: return "MalformedLine";
    case ErrorCode::kMalformedPose: return "MalformedPose";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kMissingClip: return "MissingClip";
    case ErrorCode::kDegenerateSpec: return "DegenerateSpec";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

BBox2D BBox2D::from_corners(double x1, double y1, double x2, double y2) {
  if (!std::isfinite(x1) || !std::isfinite(y1) || !std::isfinite(x2) ||
      !std::isfinite(y2)) {
    throw Error(ErrorCode::kInvalidArgument, "box coordinate is not finite");
  }
  if (x1 > x2 || y1 > y2) {
    throw Error(ErrorCode::kInvalidArgument,
                "box corners out of order: expected x1 <= x2 and y1 <= y2");
  }
  BBox2D box;
  if (x1 == x2 || y1 == y2) return box;
  box.present_ = true;
  box.x1_ = x1;
  box.y1_ = y1;
  box.x2_ = x2;
  box.y2_ = y2;
  return box;
}

double intersection_area(const BBox2D& a, const BBox2D& b) {
  if (!a.present() || !b.present()) return 0.0;
  const double w = std::min(a.x2(), b.x2()) - std::max(a.x1(), b.x1());
  const double h = std::min(a.y2(), b.y2()) - std::max(a.y1(), b.y1());
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double union_area(const BBox2D& a, const BBox2D& b) {
  return a.area() + b.area() - intersection_area(a, b);
}

double iou(const BBox2D& a, const BBox2D& b) {
  if (!a.present() && !b.present()) {
    throw Error(ErrorCode::kBothAbsent, "IoU is undefined for two Absent boxes");
  }
  const double inter = intersection_area(a, b);
  return inter / (a.area() + b.area() - inter);
}

BBox2D enclosing_box(const BBox2D& a, const BBox2D& b) {
  if (!a.present() || !b.present()) {
    throw Error(ErrorCode::kAbsentInput, "enclosing box needs two Present boxes");
  }
  return BBox2D::from_corners(std::min(a.x1(), b.x1()), std::min(a.y1(), b.y1()),
                              std::max(a.x2(), b.x2()), std::max(a.y2(), b.y2()));
}

double giou(const BBox2D& a, const BBox2D& b) {
  if (!a.present() || !b.present()) {
    throw Error(ErrorCode::kAbsentInput, "GIoU needs two Present boxes");
  }
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  const double hull = enclosing_box(a, b).area();
  // The hull covers the union; clamp so rounding cannot lift GIoU above IoU.
  return inter / uni - std::max(0.0, hull - uni) / hull;
}

BBox2D clip_to_image(const BBox2D& box, double width, double height) {
  if (!box.present()) return box;
  const double x1 = std::clamp(box.x1(), 0.0, width);
  const double y1 = std::clamp(box.y1(), 0.0, height);
  const double x2 = std::clamp(box.x2(), 0.0, width);
  const double y2 = std::clamp(box.y2(), 0.0, height);
  return BBox2D::from_corners(x1, y1, x2, y2);
}

std::vector<std::size_t> nms_indices(std::span<const ScoredBox> boxes,
                                     double iou_threshold) {
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return boxes[l].score > boxes[r].score;
  });

  std::vector<std::size_t> kept;
  for (const std::size_t candidate : order) {
    if (!boxes[candidate].box.present()) {
      throw Error(ErrorCode::kAbsentInput, "NMS input boxes must be Present");
    }
    const bool suppressed =
        std::any_of(kept.begin(), kept.end(), [&](std::size_t k) {
          return iou(boxes[k].box, boxes[candidate].box) > iou_threshold;
        });
    if (!suppressed) kept.push_back(candidate);
  }
  return kept;
}

std::vector<ScoredBox> nms(std::span<const ScoredBox> boxes, double iou_threshold) {
  std::vector<ScoredBox> out;
  for (const std::size_t i : nms_indices(boxes, iou_threshold)) {
    out.push_back(boxes[i]);
  }
  return out;
}

}  // namespace vrec
