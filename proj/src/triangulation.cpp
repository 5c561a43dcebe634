#include "vrec/triangulation.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numeric>

#include "vrec/errors.hpp"

namespace vrec {

const char* corner_name(Corner corner) {
  switch (corner) {
    case Corner::kTopLeft: return "TL";
    case Corner::kTopRight: return "TR";
    case Corner::kBottomLeft: return "BL";
    case Corner::kBottomRight: return "BR";
  }
  return "?";
}

void TriangulationConfig::validate() const {
  if (!(parallel_cos_thresh > 0.0 && parallel_cos_thresh < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "parallel_cos_thresh must lie in (0,1)");
  }
  if (min_inlier_rays < 2) {
    throw Error(ErrorCode::kInvalidArgument, "min_inlier_rays must be >= 2");
  }
  if (!(outlier_mad_factor > 0.0) || !(min_outlier_radius >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "outlier thresholds must be positive");
  }
  if (!(max_relative_residual > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "max_relative_residual must be positive");
  }
}

namespace {

const CameraIntrinsics& camera_for(const CameraMap& cameras, const CalibratedFrame& frame) {
  auto it = cameras.find(frame.camera_id);
  if (it == cameras.end()) {
    throw Error(ErrorCode::kInvalidArgument,
                "frame " + std::to_string(frame.frame_index) +
                    " references unknown camera " + std::to_string(frame.camera_id));
  }
  return it->second;
}

double median(std::vector<double> values) {
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  const double upper = *mid;
  if (n % 2 == 1) return upper;
  return 0.5 * (upper + *std::max_element(values.begin(), mid));
}

double distance_to_line(const Ray3& ray, const Point3& p) {
  const Vec3 v = p - ray.origin;
  return (v - ray.direction * ray.direction.dot(v)).norm();
}

void require_inliers(const CornerBundle& bundle, const TriangulationConfig& cfg) {
  if (bundle.rays.size() < static_cast<std::size_t>(cfg.min_inlier_rays) ||
      bundle.rays.size() < 2) {
    throw Error(ErrorCode::kTooFewInliers,
                std::string("corner ") + corner_name(bundle.corner) + " keeps " +
                    std::to_string(bundle.rays.size()) + " rays, needs " +
                    std::to_string(cfg.min_inlier_rays));
  }
}

}  // namespace

std::array<Ray3, 4> corner_rays(const BBox2D& box, const CalibratedFrame& frame,
                                const CameraIntrinsics& intr) {
  if (!frame.registered()) {
    throw Error(ErrorCode::kUnregisteredFrame,
                "frame " + std::to_string(frame.frame_index) + " has no pose");
  }
  if (!box.present()) {
    throw Error(ErrorCode::kAbsentInput, "corner rays need a Present box");
  }
  const CameraPose& pose = *frame.pose;
  return {pixel_to_ray({box.x1(), box.y1()}, pose, intr),
          pixel_to_ray({box.x2(), box.y1()}, pose, intr),
          pixel_to_ray({box.x1(), box.y2()}, pose, intr),
          pixel_to_ray({box.x2(), box.y2()}, pose, intr)};
}

Convergence converge_point(std::span<const Ray3> rays) {
  if (rays.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "convergence needs at least two rays");
  }
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  Vec3 b = Vec3::Zero();
  for (const Ray3& r : rays) {
    const Eigen::Matrix3d proj =
        Eigen::Matrix3d::Identity() - r.direction * r.direction.transpose();
    a += proj;
    b += proj * r.origin;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(a);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(2);
  if (!(lo > 0.0) || hi / lo > kMaxBundleCondition) {
    throw Error(ErrorCode::kSingularBundle,
                "ray bundle is near-parallel (condition number " +
                    std::to_string(lo > 0.0 ? hi / lo : INFINITY) + ")");
  }
  Convergence c;
  c.point = a.ldlt().solve(b);
  double sq = 0.0;
  for (const Ray3& r : rays) {
    const double d = distance_to_line(r, c.point);
    sq += d * d;
  }
  c.residual = std::sqrt(sq / static_cast<double>(rays.size()));
  return c;
}

Point3 closest_approach_midpoint(const Ray3& a, const Ray3& b) {
  const double cross = a.direction.dot(b.direction);
  const Vec3 w = a.origin - b.origin;
  const double da = a.direction.dot(w);
  const double db = b.direction.dot(w);
  const double denom = 1.0 - cross * cross;
  if (!(denom > 0.0)) {
    throw Error(ErrorCode::kSingularBundle, "parallel rays have no unique closest approach");
  }
  const double s = (cross * db - da) / denom;
  const double t = (db - cross * da) / denom;
  return 0.5 * (a.at(s) + b.at(t));
}

CornerBundle filter_rays(const CornerBundle& bundle, const TriangulationConfig& cfg) {
  CornerBundle out = bundle;
  out.point.reset();
  std::stable_sort(out.rays.begin(), out.rays.end(),
                   [](const TaggedRay& a, const TaggedRay& b) {
                     return a.frame_index < b.frame_index;
                   });

  std::vector<TaggedRay> kept;
  for (const TaggedRay& r : out.rays) {
    const bool parallel = std::any_of(kept.begin(), kept.end(), [&](const TaggedRay& k) {
      return std::abs(k.ray.direction.dot(r.ray.direction)) > cfg.parallel_cos_thresh;
    });
    if (!parallel) kept.push_back(r);
  }
  out.rays = std::move(kept);
  require_inliers(out, cfg);

  while (true) {
    const std::size_t n = out.rays.size();
    std::vector<Point3> mids;
    std::vector<std::pair<std::size_t, std::size_t>> owners;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        mids.push_back(closest_approach_midpoint(out.rays[i].ray, out.rays[j].ray));
        owners.emplace_back(i, j);
      }
    }
    Point3 center;
    for (int axis = 0; axis < 3; ++axis) {
      std::vector<double> coord(mids.size());
      for (std::size_t k = 0; k < mids.size(); ++k) coord[k] = mids[k](axis);
      center(axis) = median(std::move(coord));
    }
    std::vector<double> dist(mids.size());
    for (std::size_t k = 0; k < mids.size(); ++k) dist[k] = (mids[k] - center).norm();
    const double radius =
        std::max(cfg.outlier_mad_factor * median(dist), cfg.min_outlier_radius);

    std::vector<bool> near(n, false);
    for (std::size_t k = 0; k < mids.size(); ++k) {
      if (dist[k] <= radius) {
        near[owners[k].first] = true;
        near[owners[k].second] = true;
      }
    }
    if (std::all_of(near.begin(), near.end(), [](bool v) { return v; })) break;

    std::vector<TaggedRay> survivors;
    for (std::size_t i = 0; i < n; ++i) {
      if (near[i]) survivors.push_back(out.rays[i]);
    }
    out.rays = std::move(survivors);
    require_inliers(out, cfg);
  }

  out.inlier_frames.clear();
  for (const TaggedRay& r : out.rays) out.inlier_frames.insert(r.frame_index);
  return out;
}

BoxTriangulation triangulate_box(const std::map<std::int64_t, BBox2D>& boxes,
                                 std::span<const CalibratedFrame> frames,
                                 const CameraMap& cameras,
                                 const TriangulationConfig& cfg) {
  cfg.validate();
  std::array<CornerBundle, 4> bundles;
  for (const Corner c : kCorners) bundles[static_cast<int>(c)].corner = c;

  BoxTriangulation result;
  for (const CalibratedFrame& frame : frames) {
    if (!frame.registered()) continue;
    auto it = boxes.find(frame.frame_index);
    if (it == boxes.end() || !it->second.present()) continue;
    const auto rays = corner_rays(it->second, frame, camera_for(cameras, frame));
    for (std::size_t c = 0; c < 4; ++c) {
      bundles[c].rays.push_back({frame.frame_index, rays[c]});
    }
    result.contributing_frames.push_back(frame.frame_index);
  }
  if (result.contributing_frames.size() < static_cast<std::size_t>(cfg.min_inlier_rays)) {
    throw Error(ErrorCode::kInsufficientViews,
                std::to_string(result.contributing_frames.size()) +
                    " registered frames with a box, need " +
                    std::to_string(cfg.min_inlier_rays));
  }

  for (std::size_t c = 0; c < 4; ++c) {
    const CornerBundle filtered = filter_rays(bundles[c], cfg);
    std::vector<Ray3> rays;
    rays.reserve(filtered.rays.size());
    double depth = 0.0;
    for (const TaggedRay& r : filtered.rays) rays.push_back(r.ray);
    const Convergence conv = converge_point(rays);
    for (const Ray3& r : rays) depth += (conv.point - r.origin).norm();
    depth /= static_cast<double>(rays.size());

    CornerDiagnostics& diag = result.diagnostics[c];
    diag.n_rays = bundles[c].rays.size();
    diag.n_inliers = rays.size();
    diag.residual = conv.residual;
    diag.relative_residual = depth > 0.0 ? conv.residual / depth : INFINITY;
    if (!(diag.relative_residual <= cfg.max_relative_residual)) {
      throw Error(ErrorCode::kLargeResidual,
                  std::string("corner ") + corner_name(kCorners[c]) +
                      " rays do not converge (relative residual " +
                      std::to_string(diag.relative_residual) + ")");
    }
    result.corners[c] = conv.point;
  }
  return result;
}

BBox2D reproject_box(const std::array<Point3, 4>& corners,
                     const CalibratedFrame& frame, const CameraIntrinsics& intr) {
  if (!frame.registered()) return BBox2D::absent();
  std::vector<Pixel> pixels;
  for (const Point3& p : corners) {
    if (auto px = project_point(p, *frame.pose, intr)) pixels.push_back(*px);
  }
  if (pixels.size() < 2) return BBox2D::absent();
  double x1 = pixels[0].x(), x2 = x1, y1 = pixels[0].y(), y2 = y1;
  for (const Pixel& px : pixels) {
    x1 = std::min(x1, px.x());
    x2 = std::max(x2, px.x());
    y1 = std::min(y1, px.y());
    y2 = std::max(y2, px.y());
  }
  return clip_to_image(BBox2D::from_corners(x1, y1, x2, y2), intr.width, intr.height);
}

RefineResult refine_clip(const std::map<std::int64_t, BBox2D>& predictions,
                         std::span<const CalibratedFrame> frames,
                         const CameraMap& cameras, const TriangulationConfig& cfg) {
  RefineResult result;
  result.boxes = predictions;
  try {
    result.triangulation = triangulate_box(predictions, frames, cameras, cfg);
  } catch (const Error& e) {
    result.failed = true;
    result.failure = std::string(error_code_name(e.code())) + ": " + e.what();
    return result;
  }
  if (cfg.replace_mode == ReplaceMode::kNever) return result;

  for (const CalibratedFrame& frame : frames) {
    auto it = result.boxes.find(frame.frame_index);
    if (it == result.boxes.end() || !frame.registered()) continue;
    if (cfg.replace_mode == ReplaceMode::kOnlyAbsent && it->second.present()) continue;
    const BBox2D reprojected =
        reproject_box(result.triangulation->corners, frame, camera_for(cameras, frame));
    if (!reprojected.present()) continue;
    it->second = reprojected;
    result.replaced_frames.insert(frame.frame_index);
  }
  return result;
}

}  // namespace vrec
