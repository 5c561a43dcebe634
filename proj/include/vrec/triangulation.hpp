#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "vrec/box.hpp"
#include "vrec/camera.hpp"

namespace vrec {

struct CalibratedFrame {
  std::int64_t frame_index = 0;
  int camera_id = 0;
  // Unset when structure-from-motion did not register the frame.
  std::optional<CameraPose> pose;

  bool registered() const { return pose.has_value(); }
};

using CameraMap = std::map<int, CameraIntrinsics>;

enum class Corner { kTopLeft = 0, kTopRight = 1, kBottomLeft = 2, kBottomRight = 3 };
inline constexpr std::array<Corner, 4> kCorners = {
    Corner::kTopLeft, Corner::kTopRight, Corner::kBottomLeft, Corner::kBottomRight};
const char* corner_name(Corner corner);

enum class ReplaceMode { kAlways, kOnlyAbsent, kNever };

struct TriangulationConfig {
  // Rays closer than 2 degrees to an already kept ray are dropped.
  double parallel_cos_thresh = std::cos(2.0 * std::numbers::pi / 180.0);
  // A ray is an outlier when every pairwise closest-approach midpoint it
  // takes part in lies farther than outlier_mad_factor * MAD from the
  // median midpoint. The radius never drops below min_outlier_radius.
  double outlier_mad_factor = 3.0;
  double min_outlier_radius = 1e-6;
  int min_inlier_rays = 3;
  // RMS ray distance over mean viewing distance above which a corner, and
  // with it the whole box, is rejected.
  double max_relative_residual = 0.01;
  ReplaceMode replace_mode = ReplaceMode::kOnlyAbsent;

  void validate() const;
};

struct TaggedRay {
  std::int64_t frame_index = 0;
  Ray3 ray;
};

struct CornerBundle {
  Corner corner = Corner::kTopLeft;
  std::vector<TaggedRay> rays;
  std::optional<Point3> point;
  std::set<std::int64_t> inlier_frames;
};

// Rays through the TL, TR, BL, BR box corners, in that order.
std::array<Ray3, 4> corner_rays(const BBox2D& box, const CalibratedFrame& frame,
                                const CameraIntrinsics& intr);

struct Convergence {
  Point3 point = Point3::Zero();
  // RMS point-to-ray distance.
  double residual = 0.0;
};

inline constexpr double kMaxBundleCondition = 1e10;

// Least-squares point closest to all lines:
//   sum_i (I - d_i d_i^T) p = sum_i (I - d_i d_i^T) o_i.
// Throws ErrorCode::kSingularBundle when the normal matrix is
// ill-conditioned (near-parallel bundle) and ErrorCode::kInvalidArgument for
// fewer than two rays.
Convergence converge_point(std::span<const Ray3> rays);

// Midpoint of the shortest segment between two non-parallel lines.
Point3 closest_approach_midpoint(const Ray3& a, const Ray3& b);

// Drops near-parallel rays, then iterates the midpoint outlier rule until it
// removes nothing. Throws ErrorCode::kTooFewInliers.
CornerBundle filter_rays(const CornerBundle& bundle, const TriangulationConfig& cfg);

struct CornerDiagnostics {
  std::size_t n_rays = 0;
  std::size_t n_inliers = 0;
  double residual = 0.0;
  double relative_residual = 0.0;
};

struct BoxTriangulation {
  std::array<Point3, 4> corners;
  std::array<CornerDiagnostics, 4> diagnostics;
  std::vector<std::int64_t> contributing_frames;
};

// Each corner is solved independently from every registered frame with a
// Present box. Any corner failure fails the box.
BoxTriangulation triangulate_box(const std::map<std::int64_t, BBox2D>& boxes,
                                 std::span<const CalibratedFrame> frames,
                                 const CameraMap& cameras,
                                 const TriangulationConfig& cfg);

// Axis-aligned box of the projected corners clipped to the image. Absent if
// fewer than two corners are in front of the camera or nothing remains.
BBox2D reproject_box(const std::array<Point3, 4>& corners,
                     const CalibratedFrame& frame, const CameraIntrinsics& intr);

struct RefineResult {
  std::map<std::int64_t, BBox2D> boxes;
  std::set<std::int64_t> replaced_frames;
  std::optional<BoxTriangulation> triangulation;
  bool failed = false;
  std::string failure;
};

// Frames absent from `frames` or unregistered pass through unchanged. A
// triangulation failure leaves every prediction untouched and sets `failed`.
RefineResult refine_clip(const std::map<std::int64_t, BBox2D>& predictions,
                         std::span<const CalibratedFrame> frames,
                         const CameraMap& cameras, const TriangulationConfig& cfg);

}  // namespace vrec
