#include "vrec/camera.hpp"

#include <cmath>

#include "vrec/errors.hpp"

namespace vrec {

Ray3 Ray3::through(const Point3& origin, const Vec3& direction) {
  const double norm = direction.norm();
  if (!(norm > 0.0) || !std::isfinite(norm) || !origin.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "ray needs a finite non-zero direction");
  }
  return Ray3{origin, direction / norm};
}

void CameraIntrinsics::validate() const {
  if (!(f > 0.0) || !std::isfinite(f)) {
    throw Error(ErrorCode::kInvalidArgument, "focal length must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "image size must be positive");
  }
  if (!(cx >= 0.0 && cx <= width && cy >= 0.0 && cy <= height)) {
    throw Error(ErrorCode::kInvalidArgument,
                "principal point lies outside the image");
  }
  if (!std::isfinite(k)) {
    throw Error(ErrorCode::kInvalidArgument, "distortion is not finite");
  }
}

CameraPose CameraPose::from_center(const Eigen::Matrix3d& cam_to_world,
                                   const Point3& center) {
  CameraPose pose;
  const Eigen::Matrix3d world_to_cam = cam_to_world.transpose();
  pose.rotation = Eigen::Quaterniond(world_to_cam).normalized();
  pose.translation = -(pose.rotation.toRotationMatrix() * center);
  return pose;
}

Eigen::Vector2d distort(const Eigen::Vector2d& normalized, double k) {
  return normalized * (1.0 + k * normalized.squaredNorm());
}

Eigen::Vector2d undistort(const Eigen::Vector2d& distorted, double k) {
  const double rd = distorted.norm();
  if (rd == 0.0 || k == 0.0) return distorted;

  // Solve g(r) = r + k r^3 - rd = 0 on the branch where g'(r) > 0.
  double r = rd;
  bool converged = false;
  for (int it = 0; it < kUndistortMaxIterations; ++it) {
    const double slope = 1.0 + 3.0 * k * r * r;
    if (!(slope > 0.0)) break;
    const double step = (r + k * r * r * r - rd) / slope;
    r -= step;
    if (!std::isfinite(r) || r < 0.0) break;
    if (std::abs(step) < kUndistortTolerance * std::max(1.0, r)) {
      converged = true;
      break;
    }
  }
  if (!converged || !(1.0 + 3.0 * k * r * r > 0.0)) {
    throw Error(ErrorCode::kDivergentUndistortion,
                "radial undistortion did not converge for k*r^2 = " +
                    std::to_string(k * rd * rd));
  }
  return distorted * (r / rd);
}

std::optional<Pixel> project_point(const Point3& point, const CameraPose& pose,
                                   const CameraIntrinsics& intr) {
  const Point3 cam = pose.to_camera(point);
  if (!(cam.z() > kMinDepth)) return std::nullopt;
  const Eigen::Vector2d xd = distort(cam.head<2>() / cam.z(), intr.k);
  return Pixel(intr.f * xd.x() + intr.cx, intr.f * xd.y() + intr.cy);
}

Ray3 pixel_to_ray(const Pixel& pixel, const CameraPose& pose,
                  const CameraIntrinsics& intr) {
  const Eigen::Vector2d xd((pixel.x() - intr.cx) / intr.f,
                           (pixel.y() - intr.cy) / intr.f);
  const Eigen::Vector2d x = undistort(xd, intr.k);
  const Eigen::Matrix3d rt = pose.rotation_matrix().transpose();
  return Ray3::through(pose.center(), rt * Vec3(x.x(), x.y(), 1.0));
}

}  // namespace vrec
