#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "vrec/camera.hpp"
#include "vrec/colmap_io.hpp"
#include "vrec/json_io.hpp"
#include "vrec/metrics.hpp"
#include "vrec/triangulation.hpp"

namespace vrec {

// Planar quadrilateral in world coordinates, corners TL, TR, BL, BR.
using Box3 = std::array<Point3, 4>;

enum class TrajectoryKind { kOrbit, kDolly, kShake };

// Cameras keep the identity orientation (looking along +z) and only
// translate, so a target parallel to z = 0 projects to an axis-aligned box
// whose corners are the projections of its 3D corners.
struct Trajectory {
  TrajectoryKind kind = TrajectoryKind::kOrbit;
  int n_frames = 12;
  // Orbit: circle of `radius` in the plane z = -distance.
  double radius = 2.0;
  double distance = 10.0;
  // Dolly: straight line between two camera centres.
  Point3 start = Point3(-2.0, 0.0, -10.0);
  Point3 end = Point3(2.0, 0.0, -10.0);
  // Shake: uniform jitter of this half-width around (0, 0, -distance).
  double amplitude = 0.5;
};

struct NoiseSpec {
  double pixel_sigma = 0.0;
  double score_noise = 0.0;
  double dropout_prob = 0.0;
  double unregistered_prob = 0.0;
};

struct SceneSpec {
  std::uint64_t seed = 0;
  int n_clips = 1;
  std::string clip_prefix = "synth";
  std::string expression = "the red box on the table";
  Trajectory trajectory;
  Box3 target_box3d = {Point3(-1.0, -0.6, 0.0), Point3(1.0, -0.6, 0.0),
                       Point3(-1.0, 0.6, 0.0), Point3(1.0, 0.6, 0.0)};
  std::vector<Box3> distractors;
  NoiseSpec noise;
  bool moving_target = false;
  // World units per frame, applied when moving_target is set.
  Vec3 target_velocity = Vec3(0.3, 0.0, 0.0);
  CameraIntrinsics camera{CameraModel::kSimpleRadial, 640, 480, 500.0, 320.0, 240.0, 0.0};
  // Box coordinates are rounded to 1/quantize pixel when positive.
  int quantize = 0;
  // Annotate every n-th frame; detections cover every frame.
  int annotation_stride = 1;

  // Throws ErrorCode::kDegenerateSpec.
  void validate() const;
};

SceneSpec default_scene_spec();
SceneSpec parse_scene_spec(std::string_view text);
Json to_json(const SceneSpec& spec);

struct SynthClip {
  std::string clip_id;
  ColmapReconstruction reconstruction;
  std::vector<CalibratedFrame> frames;
  // Target corners per frame (they move when moving_target is set).
  std::vector<Box3> target_corners;
};

struct SynthOutput {
  AnnotationFile annotations;
  PredictionFile predictions;
  std::vector<SynthClip> clips;
};

// Deterministic for a given spec.
SynthOutput generate(const SceneSpec& spec);

// annotations.json, predictions.json, scene.json and colmap/<clip_id>/.
void write_fixture(const std::filesystem::path& dir, const SceneSpec& spec,
                   const SynthOutput& output);

// Clipped axis-aligned box of the projected quadrilateral, Absent when out
// of view.
BBox2D render_box(const Box3& box, const CameraPose& pose, const CameraIntrinsics& intr);

struct RasterCounts {
  std::int64_t intersection = 0;
  std::int64_t uni = 0;
};

// Counts grid cells of side 1/resolution whose centres fall inside each box.
// Exact for boxes whose corners lie on the grid.
RasterCounts raster_counts(const BBox2D& a, const BBox2D& b, int resolution);

// Split report (clip-mean aggregation) computed from raster cell counts,
// independent of the analytic metrics code.
SplitReport oracle_metrics(const AnnotationFile& annotations,
                           const PredictionFile& predictions, int resolution);

}  // namespace vrec
