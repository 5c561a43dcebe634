#include "vrec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "vrec/errors.hpp"

namespace vrec {

using schema::child;

namespace {

void degenerate(const std::string& location, const std::string& message) {
  throw Error(ErrorCode::kDegenerateSpec, message, location);
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

void check_planar(const Box3& box, const std::string& what, const std::string& location) {
  const Vec3 normal = (box[1] - box[0]).cross(box[2] - box[0]);
  const double scale = std::max({(box[1] - box[0]).norm(), (box[2] - box[0]).norm(), 1.0});
  if (!(normal.norm() > 1e-12 * scale * scale)) {
    degenerate(location, what + " corners are collinear");
  }
  if (std::abs(normal.normalized().dot(box[3] - box[0])) > 1e-9 * scale) {
    degenerate(location, what + " corners are not coplanar");
  }
}

Point3 point_from_json(const Json& v, const std::string& ptr) {
  const Json& arr = schema::expect_array(v, ptr);
  if (arr.size() != 3) schema::fail(ptr, "expected [x, y, z]");
  return {schema::expect_number(arr[0], child(ptr, 0)),
          schema::expect_number(arr[1], child(ptr, 1)),
          schema::expect_number(arr[2], child(ptr, 2))};
}

Box3 box3_from_json(const Json& v, const std::string& ptr) {
  const Json& arr = schema::expect_array(v, ptr);
  if (arr.size() != 4) schema::fail(ptr, "expected four corners TL, TR, BL, BR");
  Box3 box;
  for (std::size_t i = 0; i < 4; ++i) box[i] = point_from_json(arr[i], child(ptr, i));
  return box;
}

Json point_to_json(const Point3& p) { return Json::array({p.x(), p.y(), p.z()}); }

Json box3_to_json(const Box3& box) {
  Json arr = Json::array();
  for (const Point3& p : box) arr.push_back(point_to_json(p));
  return arr;
}

double num(const Json& obj, std::string_view key, const std::string& ptr, double fallback) {
  const Json* v = schema::optional(obj, key);
  return v ? schema::expect_number(*v, child(ptr, key)) : fallback;
}

int integer(const Json& obj, std::string_view key, const std::string& ptr, int fallback) {
  const Json* v = schema::optional(obj, key);
  if (!v) return fallback;
  const std::int64_t i = schema::expect_integer(*v, child(ptr, key));
  if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max()) {
    schema::fail(child(ptr, key), "integer out of range");
  }
  return static_cast<int>(i);
}

double quantize_coord(double v, int q) {
  return q > 0 ? std::round(v * q) / q : v;
}

BBox2D quantize_box(const BBox2D& box, int q) {
  if (!box.present() || q <= 0) return box;
  return BBox2D::from_corners(quantize_coord(box.x1(), q), quantize_coord(box.y1(), q),
                              quantize_coord(box.x2(), q), quantize_coord(box.y2(), q));
}

std::vector<Point3> camera_centers(const Trajectory& t, std::mt19937_64& rng) {
  std::vector<Point3> centers;
  const int n = t.n_frames;
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  for (int i = 0; i < n; ++i) {
    switch (t.kind) {
      case TrajectoryKind::kOrbit: {
        const double theta = 2.0 * std::numbers::pi * i / n;
        centers.emplace_back(t.radius * std::cos(theta), t.radius * std::sin(theta), -t.distance);
        break;
      }
      case TrajectoryKind::kDolly: {
        const double s = static_cast<double>(i) / (n - 1);
        centers.push_back(t.start + s * (t.end - t.start));
        break;
      }
      case TrajectoryKind::kShake: {
        const double dx = jitter(rng), dy = jitter(rng), dz = jitter(rng);
        centers.emplace_back(t.amplitude * dx, t.amplitude * dy, -t.distance + t.amplitude * dz);
        break;
      }
    }
  }
  return centers;
}

struct NoisyDraw {
  double dropout;
  double offsets[4];
  double score;
};

NoisyDraw draw(std::mt19937_64& rng, const NoiseSpec& noise) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  NoisyDraw d;
  d.dropout = uniform(rng);
  for (double& o : d.offsets) o = normal(rng) * noise.pixel_sigma;
  d.score = normal(rng) * noise.score_noise;
  return d;
}

BBox2D perturb(const BBox2D& box, const NoisyDraw& d, const CameraIntrinsics& cam, int q) {
  double x1 = box.x1() + d.offsets[0], y1 = box.y1() + d.offsets[1];
  double x2 = box.x2() + d.offsets[2], y2 = box.y2() + d.offsets[3];
  if (x1 > x2) std::swap(x1, x2);
  if (y1 > y2) std::swap(y1, y2);
  return quantize_box(clip_to_image(BBox2D::from_corners(x1, y1, x2, y2), cam.width, cam.height), q);
}

std::string clip_name(const SceneSpec& spec, int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_%04d", index);
  return spec.clip_prefix + buf;
}

std::string frame_name(std::int64_t frame) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%06lld.jpg", static_cast<long long>(frame));
  return buf;
}

}  // namespace

void SceneSpec::validate() const {
  if (n_clips < 1) degenerate("/n_clips", "n_clips must be >= 1");
  if (trajectory.n_frames < 2) {
    degenerate("/trajectory/n_frames", "a trajectory needs at least two frames");
  }
  if (trajectory.kind == TrajectoryKind::kOrbit && !(trajectory.radius > 0.0)) {
    degenerate("/trajectory/radius", "orbit radius must be positive");
  }
  if (trajectory.kind == TrajectoryKind::kDolly && trajectory.start == trajectory.end) {
    degenerate("/trajectory", "dolly start and end coincide");
  }
  if (trajectory.kind == TrajectoryKind::kShake && !(trajectory.amplitude > 0.0)) {
    degenerate("/trajectory/amplitude", "shake amplitude must be positive");
  }
  if (!(noise.pixel_sigma >= 0.0) || !(noise.score_noise >= 0.0)) {
    degenerate("/noise", "noise levels must be non-negative");
  }
  if (!is_probability(noise.dropout_prob) || !is_probability(noise.unregistered_prob)) {
    degenerate("/noise", "probabilities must lie in [0,1]");
  }
  if (quantize < 0) degenerate("/quantize", "quantize must be >= 0");
  if (annotation_stride < 1) degenerate("/annotation_stride", "annotation_stride must be >= 1");
  try {
    camera.validate();
  } catch (const Error& e) {
    degenerate("/camera", std::string("camera: ") + e.what());
  }
  check_planar(target_box3d, "target", "/target_box3d");
  for (std::size_t i = 0; i < distractors.size(); ++i) {
    check_planar(distractors[i], "distractor", child("/distractors", i));
  }
}

SceneSpec default_scene_spec() {
  SceneSpec spec;
  spec.seed = 2023;
  spec.n_clips = 4;
  spec.trajectory.kind = TrajectoryKind::kDolly;
  spec.trajectory.n_frames = 40;
  spec.trajectory.start = Point3(-9.0, 0.0, -10.0);
  spec.trajectory.end = Point3(9.0, 0.5, -10.0);
  spec.distractors.push_back({Point3(3.0, -0.5, 0.0), Point3(5.0, -0.5, 0.0),
                              Point3(3.0, 0.7, 0.0), Point3(5.0, 0.7, 0.0)});
  spec.noise.pixel_sigma = 1.0;
  spec.noise.score_noise = 0.05;
  spec.noise.dropout_prob = 0.1;
  return spec;
}

SceneSpec parse_scene_spec(std::string_view text) {
  const Json root = parse_json(text, "scene spec");
  const std::string p;
  schema::expect_object(root, p,
                        {"seed", "n_clips", "clip_prefix", "expression", "trajectory",
                         "target_box3d", "distractors", "noise", "moving_target",
                         "target_velocity", "camera", "quantize", "annotation_stride"});
  SceneSpec spec;
  if (const Json* v = schema::optional(root, "seed")) {
    const std::int64_t s = schema::expect_integer(*v, "/seed");
    if (s < 0) schema::fail("/seed", "seed must be >= 0");
    spec.seed = static_cast<std::uint64_t>(s);
  }
  spec.n_clips = integer(root, "n_clips", p, spec.n_clips);
  if (const Json* v = schema::optional(root, "clip_prefix")) {
    spec.clip_prefix = schema::expect_string(*v, "/clip_prefix");
  }
  if (const Json* v = schema::optional(root, "expression")) {
    spec.expression = schema::expect_string(*v, "/expression");
  }
  if (const Json* t = schema::optional(root, "trajectory")) {
    const std::string tp = "/trajectory";
    schema::expect_object(*t, tp,
                          {"type", "n_frames", "radius", "distance", "start", "end", "amplitude"});
    const std::string type = schema::expect_string(schema::require(*t, "type", tp), tp + "/type");
    Trajectory& tr = spec.trajectory;
    if (type == "orbit") {
      tr.kind = TrajectoryKind::kOrbit;
    } else if (type == "dolly") {
      tr.kind = TrajectoryKind::kDolly;
    } else if (type == "shake") {
      tr.kind = TrajectoryKind::kShake;
    } else {
      schema::fail(tp + "/type", "expected \"orbit\", \"dolly\" or \"shake\"");
    }
    tr.n_frames = integer(*t, "n_frames", tp, tr.n_frames);
    tr.radius = num(*t, "radius", tp, tr.radius);
    tr.distance = num(*t, "distance", tp, tr.distance);
    tr.amplitude = num(*t, "amplitude", tp, tr.amplitude);
    if (const Json* v = schema::optional(*t, "start")) tr.start = point_from_json(*v, tp + "/start");
    if (const Json* v = schema::optional(*t, "end")) tr.end = point_from_json(*v, tp + "/end");
  }
  if (const Json* v = schema::optional(root, "target_box3d")) {
    spec.target_box3d = box3_from_json(*v, "/target_box3d");
  }
  if (const Json* v = schema::optional(root, "distractors")) {
    const Json& arr = schema::expect_array(*v, "/distractors");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      spec.distractors.push_back(box3_from_json(arr[i], child("/distractors", i)));
    }
  }
  if (const Json* n = schema::optional(root, "noise")) {
    const std::string np = "/noise";
    schema::expect_object(*n, np,
                          {"pixel_sigma", "score_noise", "dropout_prob", "unregistered_prob"});
    spec.noise.pixel_sigma = num(*n, "pixel_sigma", np, 0.0);
    spec.noise.score_noise = num(*n, "score_noise", np, 0.0);
    spec.noise.dropout_prob = num(*n, "dropout_prob", np, 0.0);
    spec.noise.unregistered_prob = num(*n, "unregistered_prob", np, 0.0);
  }
  if (const Json* v = schema::optional(root, "moving_target")) {
    spec.moving_target = schema::expect_bool(*v, "/moving_target");
  }
  if (const Json* v = schema::optional(root, "target_velocity")) {
    spec.target_velocity = point_from_json(*v, "/target_velocity");
  }
  if (const Json* c = schema::optional(root, "camera")) {
    const std::string cp = "/camera";
    schema::expect_object(*c, cp, {"width", "height", "f", "cx", "cy", "k"});
    CameraIntrinsics& cam = spec.camera;
    cam.width = integer(*c, "width", cp, cam.width);
    cam.height = integer(*c, "height", cp, cam.height);
    cam.f = num(*c, "f", cp, cam.f);
    cam.cx = num(*c, "cx", cp, cam.width / 2.0);
    cam.cy = num(*c, "cy", cp, cam.height / 2.0);
    cam.k = num(*c, "k", cp, cam.k);
  }
  spec.quantize = integer(root, "quantize", p, spec.quantize);
  spec.annotation_stride = integer(root, "annotation_stride", p, spec.annotation_stride);
  spec.validate();
  return spec;
}

Json to_json(const SceneSpec& spec) {
  const Trajectory& t = spec.trajectory;
  Json traj = {{"n_frames", t.n_frames}};
  switch (t.kind) {
    case TrajectoryKind::kOrbit:
      traj["type"] = "orbit";
      traj["radius"] = t.radius;
      traj["distance"] = t.distance;
      break;
    case TrajectoryKind::kDolly:
      traj["type"] = "dolly";
      traj["start"] = point_to_json(t.start);
      traj["end"] = point_to_json(t.end);
      break;
    case TrajectoryKind::kShake:
      traj["type"] = "shake";
      traj["amplitude"] = t.amplitude;
      traj["distance"] = t.distance;
      break;
  }
  Json distractors = Json::array();
  for (const Box3& d : spec.distractors) distractors.push_back(box3_to_json(d));
  return {{"seed", spec.seed},
          {"n_clips", spec.n_clips},
          {"clip_prefix", spec.clip_prefix},
          {"expression", spec.expression},
          {"trajectory", traj},
          {"target_box3d", box3_to_json(spec.target_box3d)},
          {"distractors", distractors},
          {"noise",
           {{"pixel_sigma", spec.noise.pixel_sigma},
            {"score_noise", spec.noise.score_noise},
            {"dropout_prob", spec.noise.dropout_prob},
            {"unregistered_prob", spec.noise.unregistered_prob}}},
          {"moving_target", spec.moving_target},
          {"target_velocity", point_to_json(spec.target_velocity)},
          {"camera",
           {{"width", spec.camera.width},
            {"height", spec.camera.height},
            {"f", spec.camera.f},
            {"cx", spec.camera.cx},
            {"cy", spec.camera.cy},
            {"k", spec.camera.k}}},
          {"quantize", spec.quantize},
          {"annotation_stride", spec.annotation_stride}};
}

BBox2D render_box(const Box3& box, const CameraPose& pose, const CameraIntrinsics& intr) {
  return reproject_box(box, CalibratedFrame{0, 1, pose}, intr);
}

SynthOutput generate(const SceneSpec& spec) {
  spec.validate();
  SynthOutput out;
  const CameraIntrinsics& cam = spec.camera;
  const int q = spec.quantize;

  for (int c = 0; c < spec.n_clips; ++c) {
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed & 0xffffffffu),
                      static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(c)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    SynthClip clip;
    clip.clip_id = clip_name(spec, c);
    clip.reconstruction.cameras[1] = cam;

    AnnotatedClip ann;
    ann.clip_id = clip.clip_id;
    ann.expression = spec.expression;
    ann.tags.uniqueness = spec.distractors.empty() ? Uniqueness::kSingle : Uniqueness::kMultiple;
    ann.tags.movement = spec.moving_target ? Movement::kMoving : Movement::kStatic;
    PredictedClip pred;
    pred.clip_id = clip.clip_id;

    const std::vector<Point3> centers = camera_centers(spec.trajectory, rng);
    for (int i = 0; i < spec.trajectory.n_frames; ++i) {
      const CameraPose pose = CameraPose::from_center(Eigen::Matrix3d::Identity(), centers[i]);
      const bool registered = !(uniform(rng) < spec.noise.unregistered_prob);

      Box3 target = spec.target_box3d;
      if (spec.moving_target) {
        for (Point3& p : target) p += static_cast<double>(i) * spec.target_velocity;
      }
      clip.target_corners.push_back(target);

      const BBox2D exact = render_box(target, pose, cam);
      const BBox2D gt = quantize_box(exact, q);

      PredictedFrame frame;
      frame.frame_index = i;
      const NoisyDraw td = draw(rng, spec.noise);
      if (exact.present() && !(td.dropout < spec.noise.dropout_prob)) {
        const BBox2D box = perturb(exact, td, cam, q);
        if (box.present()) {
          frame.boxes.push_back({box, std::clamp(0.9 - td.score, 0.0, 1.0)});
        }
      }
      for (const Box3& distractor : spec.distractors) {
        const NoisyDraw dd = draw(rng, spec.noise);
        const BBox2D seen = render_box(distractor, pose, cam);
        if (!seen.present()) continue;
        const BBox2D box = perturb(seen, dd, cam, q);
        if (box.present()) frame.boxes.push_back({box, std::clamp(0.4 + dd.score, 0.0, 1.0)});
      }
      pred.frames.push_back(std::move(frame));

      if (i % spec.annotation_stride == 0) ann.frames.push_back({i, gt});

      CalibratedFrame cf;
      cf.frame_index = i;
      cf.camera_id = 1;
      if (registered) {
        cf.pose = pose;
        clip.reconstruction.images[i + 1] = ColmapImage{i + 1, pose, 1, frame_name(i)};
      }
      clip.frames.push_back(cf);
    }
    out.annotations.clips.push_back(std::move(ann));
    out.predictions.clips.push_back(std::move(pred));
    out.clips.push_back(std::move(clip));
  }
  return out;
}

void write_fixture(const std::filesystem::path& dir, const SceneSpec& spec,
                   const SynthOutput& output) {
  std::filesystem::create_directories(dir);
  write_annotations(dir / "annotations.json", output.annotations);
  write_predictions(dir / "predictions.json", output.predictions);
  write_text_file(dir / "scene.json", canonical_dump(to_json(spec)));
  for (const SynthClip& clip : output.clips) {
    write_reconstruction(dir / "colmap" / clip.clip_id, clip.reconstruction);
  }
}

RasterCounts raster_counts(const BBox2D& a, const BBox2D& b, int resolution) {
  RasterCounts counts;
  if (!a.present() && !b.present()) return counts;
  if (resolution < 1) throw Error(ErrorCode::kInvalidArgument, "resolution must be >= 1");
  const double r = resolution;
  double xmin = INFINITY, ymin = INFINITY, xmax = -INFINITY, ymax = -INFINITY;
  for (const BBox2D* box : {&a, &b}) {
    if (!box->present()) continue;
    xmin = std::min(xmin, box->x1());
    ymin = std::min(ymin, box->y1());
    xmax = std::max(xmax, box->x2());
    ymax = std::max(ymax, box->y2());
  }
  const auto inside = [](const BBox2D& box, double x, double y) {
    return box.present() && box.x1() <= x && x < box.x2() && box.y1() <= y && y < box.y2();
  };
  const auto i0 = static_cast<std::int64_t>(std::floor(xmin * r));
  const auto i1 = static_cast<std::int64_t>(std::ceil(xmax * r));
  const auto j0 = static_cast<std::int64_t>(std::floor(ymin * r));
  const auto j1 = static_cast<std::int64_t>(std::ceil(ymax * r));
  for (std::int64_t j = j0; j < j1; ++j) {
    const double y = (static_cast<double>(j) + 0.5) / r;
    for (std::int64_t i = i0; i < i1; ++i) {
      const double x = (static_cast<double>(i) + 0.5) / r;
      const bool in_a = inside(a, x, y);
      const bool in_b = inside(b, x, y);
      counts.intersection += (in_a && in_b) ? 1 : 0;
      counts.uni += (in_a || in_b) ? 1 : 0;
    }
  }
  return counts;
}

SplitReport oracle_metrics(const AnnotationFile& annotations,
                           const PredictionFile& predictions, int resolution) {
  SplitReport report;
  double stiou_total = 0.0, iou_n_total = 0.0, ap_n_total = 0.0;
  double iou_total = 0.0, ap_total = 0.0;
  int clips_with_target = 0;

  for (const AnnotatedClip& ann : annotations.clips) {
    const PredictedClip* pred = predictions.find(ann.clip_id);
    std::int64_t inter_sum = 0, union_sum = 0;
    double iou_n = 0.0, iou_m = 0.0;
    int hits_n = 0, hits_m = 0, n_m = 0;
    for (const AnnotatedFrame& f : ann.frames) {
      BBox2D p;
      if (pred) {
        for (const PredictedFrame& pf : pred->frames) {
          if (pf.frame_index != f.frame_index) continue;
          double best = -INFINITY;
          for (const PredictedBox& b : pf.boxes) {
            const double s = b.score ? *b.score : 0.0;
            if (s > best) {
              best = s;
              p = b.box;
            }
          }
        }
      }
      const RasterCounts rc = raster_counts(p, f.gt, resolution);
      inter_sum += rc.intersection;
      union_sum += rc.uni;
      const double v = rc.uni == 0 ? 1.0 : static_cast<double>(rc.intersection) / rc.uni;
      iou_n += v;
      hits_n += v > 0.5 ? 1 : 0;
      if (f.gt.present()) {
        ++n_m;
        iou_m += v;
        hits_m += v > 0.5 ? 1 : 0;
      }
    }
    const double n = static_cast<double>(ann.frames.size());
    stiou_total += union_sum == 0 ? 1.0 : static_cast<double>(inter_sum) / union_sum;
    if (union_sum == 0) ++report.n_vacuous_clips;
    iou_n_total += iou_n / n;
    ap_n_total += hits_n / n;
    if (n_m > 0) {
      iou_total += iou_m / n_m;
      ap_total += static_cast<double>(hits_m) / n_m;
      ++clips_with_target;
    }
    report.n_images += ann.frames.size();
    report.n_images_with_target += static_cast<std::size_t>(n_m);
  }
  report.n_clips = annotations.clips.size();
  if (report.n_clips == 0) throw Error(ErrorCode::kEmptySplit, "no clips to aggregate");
  const double nc = static_cast<double>(report.n_clips);
  report.mstiou = stiou_total / nc;
  report.miou_plus_n = iou_n_total / nc;
  report.map50_plus_n = ap_n_total / nc;
  if (clips_with_target > 0) {
    report.miou = iou_total / clips_with_target;
    report.map50 = ap_total / clips_with_target;
  }
  return report;
}

}  // namespace vrec
