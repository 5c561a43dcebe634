#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace vrec {

// Axis-aligned box in continuous pixel coordinates, or the explicit "no box"
// marker. A zero-area box cannot be Present: construction normalizes it to
// Absent so that |p| = 0 has exactly one representation.
class BBox2D {
 public:
  BBox2D() = default;

  static BBox2D absent() { return {}; }
  // Throws ErrorCode::kInvalidArgument when x1 > x2, y1 > y2 or a coordinate
  // is not finite.
  static BBox2D from_corners(double x1, double y1, double x2, double y2);

  bool present() const { return present_; }
  bool is_absent() const { return !present_; }

  double x1() const { return x1_; }
  double y1() const { return y1_; }
  double x2() const { return x2_; }
  double y2() const { return y2_; }
  double width() const { return x2_ - x1_; }
  double height() const { return y2_ - y1_; }
  double area() const { return present_ ? (x2_ - x1_) * (y2_ - y1_) : 0.0; }

  friend bool operator==(const BBox2D& a, const BBox2D& b) {
    if (a.present_ != b.present_) return false;
    if (!a.present_) return true;
    return a.x1_ == b.x1_ && a.y1_ == b.y1_ && a.x2_ == b.x2_ &&
           a.y2_ == b.y2_;
  }

 private:
  bool present_ = false;
  double x1_ = 0, y1_ = 0, x2_ = 0, y2_ = 0;
};

double intersection_area(const BBox2D& a, const BBox2D& b);
double union_area(const BBox2D& a, const BBox2D& b);

// Intersection over union. Returns 0 when exactly one box is Absent and
// throws ErrorCode::kBothAbsent when both are: that case belongs to the
// IoU+n metric.
double iou(const BBox2D& a, const BBox2D& b);

// Generalized IoU, in (-1, 1]. Both boxes must be Present.
double giou(const BBox2D& a, const BBox2D& b);

// Smallest axis-aligned box enclosing both Present boxes.
BBox2D enclosing_box(const BBox2D& a, const BBox2D& b);

// Intersection of a box with [0,width] x [0,height]; Absent when nothing
// with positive area remains.
BBox2D clip_to_image(const BBox2D& box, double width, double height);

struct ScoredBox {
  BBox2D box;
  double score = 0.0;
};

inline constexpr double kDefaultNmsIouThreshold = 0.5;

// Greedy non-maximum suppression. Candidates are visited by descending score,
// equal scores in input order; a candidate survives when its IoU with every
// earlier survivor is <= iou_threshold. Returns the surviving input indices
// in visiting order.
std::vector<std::size_t> nms_indices(std::span<const ScoredBox> boxes,
                                     double iou_threshold = kDefaultNmsIouThreshold);
std::vector<ScoredBox> nms(std::span<const ScoredBox> boxes,
                           double iou_threshold = kDefaultNmsIouThreshold);

}  // namespace vrec
