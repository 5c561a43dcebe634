#pragma once

#include <optional>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace vrec {

using Point3 = Eigen::Vector3d;
using Vec3 = Eigen::Vector3d;
using Pixel = Eigen::Vector2d;

// Back-projected line of sight. direction is unit length.
struct Ray3 {
  Point3 origin = Point3::Zero();
  Vec3 direction = Vec3::UnitZ();

  Point3 at(double s) const { return origin + s * direction; }
  // Throws ErrorCode::kInvalidArgument for a zero or non-finite direction.
  static Ray3 through(const Point3& origin, const Vec3& direction);
};

enum class CameraModel { kSimpleRadial };

// COLMAP SIMPLE_RADIAL: one focal length, principal point, one radial term.
struct CameraIntrinsics {
  CameraModel model = CameraModel::kSimpleRadial;
  int width = 0;
  int height = 0;
  double f = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  double k = 0.0;

  // Throws ErrorCode::kInvalidArgument unless f > 0 and the principal point
  // lies inside the image rectangle.
  void validate() const;
};

// World-to-camera rigid transform, X_cam = R * X_world + T.
struct CameraPose {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Vec3 translation = Vec3::Zero();

  static CameraPose identity() { return {}; }
  // Pose of a camera centred at `center` whose camera-to-world rotation is
  // `cam_to_world`.
  static CameraPose from_center(const Eigen::Matrix3d& cam_to_world,
                                const Point3& center);

  Eigen::Matrix3d rotation_matrix() const {
    return rotation.toRotationMatrix();
  }
  Point3 center() const {
    return -(rotation.toRotationMatrix().transpose() * translation);
  }
  Point3 to_camera(const Point3& world) const {
    return rotation.toRotationMatrix() * world + translation;
  }
};

inline constexpr double kMinDepth = 1e-6;
inline constexpr int kUndistortMaxIterations = 20;
inline constexpr double kUndistortTolerance = 1e-12;

// Applies x_d = x (1 + k r^2) to normalized image coordinates.
Eigen::Vector2d distort(const Eigen::Vector2d& normalized, double k);

// Inverts distort() with Newton steps on the radius. Throws
// ErrorCode::kDivergentUndistortion when no root lies on the monotone branch
// of r (1 + k r^2) or the iteration does not settle.
Eigen::Vector2d undistort(const Eigen::Vector2d& distorted, double k);

// Pixel of a world point, or nullopt when the point is not in front of the
// camera (depth <= kMinDepth).
std::optional<Pixel> project_point(const Point3& point, const CameraPose& pose,
                                   const CameraIntrinsics& intr);

Ray3 pixel_to_ray(const Pixel& pixel, const CameraPose& pose,
                  const CameraIntrinsics& intr);

}  // namespace vrec
