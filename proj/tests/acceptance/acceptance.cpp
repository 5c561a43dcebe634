// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "vrec/cli.hpp"
#include "vrec/colmap_io.hpp"
#include "vrec/errors.hpp"
#include "vrec/evaluation.hpp"
#include "vrec/fusion.hpp"
#include "vrec/kalman.hpp"
#include "vrec/synth.hpp"
#include "vrec/triangulation.hpp"

using namespace vrec;
namespace fs = std::filesystem;
using fixtures::box;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failed conditions; the first few are kept for the report.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  Outcome outcome(const std::string& summary) const {
    if (failures_ == 0) return {true, summary};
    return {false, std::to_string(failures_) + " failed: " + notes_};
  }

 private:
  int failures_ = 0;
  std::string notes_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* pattern, double v) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

SplitReport analytic_report(const AnnotationFile& ann, const PredictionFile& pred) {
  return evaluate_split(pair_clips(ann, pred), Aggregation::kClipMean).split;
}

// 1
Outcome metric_oracle_equivalence() {
  Checker check;
  const auto start = std::chrono::steady_clock::now();
  const TrajectoryKind kinds[] = {TrajectoryKind::kOrbit, TrajectoryKind::kDolly, TrajectoryKind::kShake};
  double worst = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    SceneSpec spec;
    spec.seed = static_cast<std::uint64_t>(seed);
    spec.n_clips = 2;
    spec.trajectory.kind = kinds[seed % 3];
    spec.trajectory.n_frames = 16;
    spec.trajectory.start = Point3(-9, 0, -10);
    spec.trajectory.end = Point3(9, 0.5, -10);
    spec.distractors.push_back({Point3(2, -1, 0), Point3(3.5, -1, 0), Point3(2, 0.2, 0), Point3(3.5, 0.2, 0)});
    spec.noise = {6.0, 0.2, 0.3, 0.0};
    spec.quantize = 1;
    const SynthOutput out = generate(spec);
    const SplitReport a = analytic_report(out.annotations, out.predictions);
    const SplitReport b = oracle_metrics(out.annotations, out.predictions, 1);
    const auto cmp = [&](double x, double y, const char* field) {
      worst = std::max(worst, std::abs(x - y));
      check.expect(std::abs(x - y) <= 1e-6, "seed " + std::to_string(seed) + " " + field);
    };
    cmp(a.mstiou, b.mstiou, "mSTIoU");
    cmp(a.miou_plus_n, b.miou_plus_n, "mIoU+n");
    cmp(a.map50_plus_n, b.map50_plus_n, "mAP@50+n");
    check.expect(a.miou.has_value() == b.miou.has_value(), "mIoU presence");
    if (a.miou && b.miou) {
      cmp(*a.miou, *b.miou, "mIoU");
      cmp(*a.map50, *b.map50, "mAP@50");
    }
  }
  const double t = seconds_since(start);
  check.expect(t < 10.0, fmt("took %.2f s", t));
  return check.outcome("100 scenes, max deviation " + fmt("%.2e", worst) + ", " + fmt("%.2f s", t));
}

// 2
Outcome all_absent_predictor() {
  Checker check;
  const BBox2D t = box(0, 0, 10, 10), n = BBox2D::absent();
  AnnotationFile ann;
  ann.clips.push_back({"a", "x", 2.0, {{0, t}, {1, n}, {2, t}, {3, t}}, {}});
  ann.clips.push_back({"b", "x", 2.0, {{0, n}, {1, t}, {2, n}, {3, t}, {4, t}}, {}});
  ann.clips.push_back({"c", "x", 2.0, {{0, n}, {1, n}}, {}});
  const double q = (1.0 / 4.0 + 2.0 / 5.0 + 2.0 / 2.0) / 3.0;
  PredictionFile none;
  for (const AnnotatedClip& c : ann.clips) {
    PredictedClip pc{c.clip_id, {}};
    for (const AnnotatedFrame& f : c.frames) pc.frames.push_back({f.frame_index, {}});
    none.clips.push_back(pc);
  }
  const SplitReport r = analytic_report(ann, none);
  check.expect(r.miou_plus_n == q, "mIoU+n " + fmt("%.17g", r.miou_plus_n));
  check.expect(r.map50_plus_n == q, "mAP@50+n " + fmt("%.17g", r.map50_plus_n));
  check.expect(r.miou && *r.miou == 0.0, "mIoU");
  check.expect(r.map50 && *r.map50 == 0.0, "mAP@50");
  return check.outcome("mIoU+n = mAP@50+n = " + fmt("%.6f", q) + ", mIoU = 0");
}

// 3
Outcome stiou_laws() {
  Checker check;
  std::mt19937_64 rng(101);
  std::bernoulli_distribution coin(0.35);
  std::uniform_int_distribution<int> length(1, 12);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<BBox2D> gt, pred;
    const int n = length(rng);
    for (int f = 0; f < n; ++f) {
      gt.push_back(coin(rng) ? BBox2D::absent() : fixtures::random_box(rng, 50));
      pred.push_back(coin(rng) ? BBox2D::absent() : fixtures::random_box(rng, 50));
    }
    // One exact hit keeps the numerator positive.
    gt[0] = pred[0] = fixtures::random_box(rng, 50);
    ClipEvaluation clip = fixtures::make_clip("c", gt, pred);
    const double base = stiou(clip).value;
    check.expect(base >= 0.0 && base <= 1.0, "bounds");

    ClipEvaluation shuffled = clip;
    std::shuffle(shuffled.frames.begin(), shuffled.frames.end(), rng);
    check.expect(std::abs(stiou(shuffled).value - base) <= 1e-12, "permutation");

    ClipEvaluation extra = clip;
    extra.frames.push_back({100, BBox2D::absent(), BBox2D::absent(), std::nullopt});
    check.expect(stiou(extra).value == base, "both-Absent frame changed stiou");
    extra.frames.back().pred = fixtures::random_box(rng, 50);
    check.expect(stiou(extra).value < base, "no strict decrease");
  }
  // Target frames share IoU 0.5 but differ in area by 100x; a prediction on a
  // target-free frame then separates stiou from both 0.5 and the frame mean.
  const ClipEvaluation weighted = fixtures::make_clip(
      "w", {box(0, 0, 1, 1), box(0, 0, 10, 10), BBox2D::absent()},
      {box(0, 0, 2, 1), box(0, 0, 5, 10), box(0, 0, 1, 2)});
  const ClipMetrics m = clip_metrics(weighted);
  check.expect(*m.mean_iou == 0.5, "fixture IoU");
  check.expect(std::abs(m.stiou - 51.0 / 104.0) < 1e-15, "fixture stiou " + fmt("%.9f", m.stiou));
  check.expect(m.stiou != 0.5 && std::abs(m.stiou - m.mean_iou_plus_n) > 0.1, "fixture separation");
  return check.outcome("1000 random clips; area-weighted fixture stiou " + fmt("%.6f", m.stiou));
}

// 4
Outcome auc_mann_whitney() {
  Checker check;
  std::mt19937_64 rng(103);
  std::uniform_int_distribution<int> size(1, 60), level(0, 9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> pos, neg;
    std::vector<ScoredLabel> samples;
    const bool ties = trial % 3 == 0;
    for (int i = size(rng); i > 0; --i) pos.push_back(ties ? level(rng) / 9.0 : u(rng));
    for (int i = size(rng); i > 0; --i) neg.push_back(ties ? level(rng) / 9.0 : 0.7 * u(rng));
    for (const double p : pos) samples.push_back({p, true});
    for (const double v : neg) samples.push_back({v, false});
    std::shuffle(samples.begin(), samples.end(), rng);
    const double d = std::abs(roc_curve(samples).auc - oracle::mann_whitney(pos, neg));
    worst = std::max(worst, d);
    check.expect(d <= 1e-9, "trial " + std::to_string(trial));
  }
  const std::vector<ScoredLabel> flat = {{0.4, true}, {0.4, false}, {0.4, true}, {0.4, false}, {0.4, false}};
  const double chance = roc_curve(flat).auc;
  check.expect(fmt("%.1f", chance * 100) == "50.0", "constant scores");
  return check.outcome("500 sets, max deviation " + fmt("%.1e", worst) + "; constant scores " +
                       fmt("%.1f", chance * 100));
}

// 5
Outcome triangulation_round_trip() {
  Checker check;
  const auto start = std::chrono::steady_clock::now();
  SceneSpec spec;
  spec.trajectory.kind = TrajectoryKind::kOrbit;
  spec.trajectory.n_frames = 12;
  const CameraMap cams = {{1, spec.camera}};
  const TriangulationConfig cfg;

  const SynthOutput clean = generate(spec);
  std::map<std::int64_t, BBox2D> gt;
  for (const AnnotatedFrame& f : clean.annotations.clips[0].frames) gt[f.frame_index] = f.gt;
  const BoxTriangulation t = triangulate_box(gt, clean.clips[0].frames, cams, cfg);
  double corner_err = 0.0, min_iou = 1.0;
  for (int c = 0; c < 4; ++c) corner_err = std::max(corner_err, (t.corners[c] - spec.target_box3d[c]).norm());
  for (const CalibratedFrame& f : clean.clips[0].frames) {
    min_iou = std::min(min_iou, iou(reproject_box(t.corners, f, spec.camera), gt[f.frame_index]));
  }
  check.expect(corner_err <= 1e-6, "corner error " + fmt("%.2e", corner_err));
  check.expect(min_iou >= 0.99, "noiseless IoU " + fmt("%.4f", min_iou));

  SceneSpec noisy = spec;
  noisy.trajectory.n_frames = 20;
  noisy.noise.pixel_sigma = 1.0;
  const SynthOutput out = generate(noisy);
  std::map<std::int64_t, BBox2D> measured, truth;
  for (const PredictedFrame& f : out.predictions.clips[0].frames) measured[f.frame_index] = top1(f).box;
  for (const AnnotatedFrame& f : out.annotations.clips[0].frames) truth[f.frame_index] = f.gt;
  const BoxTriangulation tn = triangulate_box(measured, out.clips[0].frames, cams, cfg);
  double sum = 0.0;
  for (const CalibratedFrame& f : out.clips[0].frames) sum += iou(reproject_box(tn.corners, f, noisy.camera), truth[f.frame_index]);
  const double mean_iou = sum / 20.0;
  check.expect(mean_iou >= 0.9, "noisy mean IoU " + fmt("%.4f", mean_iou));

  SceneSpec moving = spec;
  moving.moving_target = true;
  const SynthOutput mv = generate(moving);
  std::map<std::int64_t, BBox2D> mv_boxes;
  for (const AnnotatedFrame& f : mv.annotations.clips[0].frames) mv_boxes[f.frame_index] = f.gt;
  const RefineResult r = refine_clip(mv_boxes, mv.clips[0].frames, cams, cfg);
  check.expect(r.failed, "moving target was not rejected");
  const double secs = seconds_since(start);
  check.expect(secs < 5.0, fmt("took %.2f s", secs));
  return check.outcome("corner error " + fmt("%.1e", corner_err) + ", min IoU " + fmt("%.4f", min_iou) +
                       ", noisy mean IoU " + fmt("%.4f", mean_iou) + ", moving: " + r.failure.substr(0, 40));
}

// 6
Outcome converge_point_oracle() {
  Checker check;
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::uniform_int_distribution<int> count(2, 25);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Point3 target(u(rng), u(rng), u(rng));
    std::vector<Ray3> rays;
    for (int i = count(rng); i > 0; --i) {
      const Point3 origin(u(rng), u(rng), u(rng));
      const Vec3 d = (target - origin).normalized() + Vec3(noise(rng), noise(rng), noise(rng));
      rays.push_back(Ray3::through(origin, d));
    }
    const double d = (converge_point(rays).point - oracle::descent_minimizer(rays)).norm();
    worst = std::max(worst, d);
    check.expect(d <= 1e-6, "bundle " + std::to_string(trial) + " off by " + fmt("%.2e", d));
  }
  const std::vector<Ray3> parallel = {Ray3::through(Point3(0, 0, 0), Vec3(1, 1, 0)),
                                      Ray3::through(Point3(0, 0, 1), Vec3(1, 1, 0)),
                                      Ray3::through(Point3(3, 0, 0), Vec3(-1, -1, 0))};
  bool singular = false;
  try {
    converge_point(parallel);
  } catch (const Error& e) {
    singular = e.code() == ErrorCode::kSingularBundle;
  }
  check.expect(singular, "parallel bundle accepted");
  return check.outcome("100 bundles, max deviation " + fmt("%.1e", worst) + "; parallel bundle rejected");
}

int run_quiet(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

// 7
Outcome tracking_fusion() {
  Checker check;
  const fixtures::Crossing c = fixtures::crossing();
  TrackingResult tracking = run_tracker(c.stream, TrackerConfig{});
  const auto selection = fuse_scores(tracking);
  check.expect(selection.at(5).box == c.a_boxes[5], "frame 5 not restored");

  const AnnotationFile ann = fixtures::crossing_annotations();
  const PredictionFile raw = fixtures::crossing_predictions();
  PredictionFile fused{{{"crossing", {}}}};
  for (const auto& [frame, s] : selection) fused.clips[0].frames.push_back({frame, {{s.box, s.score}}});
  const double before = analytic_report(ann, raw).mstiou;
  const double after = analytic_report(ann, fused).mstiou;
  check.expect(after > before, "mSTIoU did not improve");

  fixtures::TempDir dir("acc_fuse");
  SceneSpec spec;
  spec.trajectory.n_frames = 30;
  spec.noise = {2.0, 0.1, 0.2, 0.0};
  const SynthOutput single = generate(spec);
  write_predictions(dir / "in.json", single.predictions);
  check.expect(run_quiet({"fuse", "--detections", (dir / "in.json").string(), "--out", (dir / "out.json").string()}) == 0,
               "fuse failed");
  check.expect(read_text_file(dir / "in.json") == read_text_file(dir / "out.json"), "single-candidate stream changed");
  return check.outcome("mSTIoU top-1 " + fmt("%.4f", before) + " -> fused " + fmt("%.4f", after) +
                       "; single-candidate stream bit-identical");
}

// 8
Outcome kalman_giou_sanity() {
  Checker check;
  std::mt19937_64 rng(109);
  for (int i = 0; i < 10000; ++i) {
    const BBox2D a = fixtures::random_box(rng, 100), b = fixtures::random_box(rng, 100);
    check.expect(giou(a, a) == 1.0, "giou(a,a)");
    check.expect(giou(a, b) <= iou(a, b), "giou > iou");
  }
  std::uniform_int_distribution<int> dt(1, 4);
  std::normal_distribution<double> jitter(0.0, 4.0);
  KalmanState s = kalman_initiate(box(200, 200, 260, 320));
  double min_eig = 1e300, max_asym = 0.0;
  for (int cycle = 0; cycle < 1000; ++cycle) {
    s = kalman_predict(s, dt(rng));
    const BBox2D cur = s.box();
    const double cx = (cur.x1() + cur.x2()) / 2 + jitter(rng), cy = (cur.y1() + cur.y2()) / 2 + jitter(rng);
    const double w = std::clamp(cur.width() + jitter(rng), 20.0, 300.0);
    const double h = std::clamp(cur.height() + jitter(rng), 20.0, 300.0);
    s = kalman_update(s, box(cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2));
    max_asym = std::max(max_asym, (s.covariance - s.covariance.transpose()).cwiseAbs().maxCoeff());
    min_eig = std::min(min_eig, Eigen::SelfAdjointEigenSolver<StateMatrix>(s.covariance).eigenvalues().minCoeff());
  }
  check.expect(max_asym == 0.0, "asymmetric covariance");
  check.expect(min_eig >= -1e-9, "negative eigenvalue " + fmt("%.2e", min_eig));
  return check.outcome("10^4 box pairs; 10^3 cycles, min eigenvalue " + fmt("%.2e", min_eig));
}

// 9
Outcome parser_round_trips() {
  Checker check;
  const fs::path dir = fixtures::source_dir() / "fixtures";
  const std::string cameras = read_text_file(dir / "cameras.txt");
  const std::string images = read_text_file(dir / "images.txt");
  const std::string ann = read_text_file(dir / "annotations.json");
  const std::string pred = read_text_file(dir / "predictions.json");
  const std::string tracks = read_text_file(dir / "tracks.json");
  check.expect(write_cameras(parse_cameras(cameras)) == cameras, "cameras.txt");
  check.expect(write_images(parse_images(images)) == images, "images.txt");
  check.expect(canonical_dump(to_json(parse_annotations(ann))) == ann, "annotations");
  check.expect(canonical_dump(to_json(parse_predictions(pred))) == pred, "predictions");
  check.expect(canonical_dump(to_json(parse_tracks(tracks))) == tracks, "tracks");

  // Random corruption must yield a located Error or a clean parse.
  const std::vector<std::pair<std::string, std::function<void(const std::string&)>>> parsers = {
      {cameras, [](const std::string& s) { parse_cameras(s); }},
      {images, [](const std::string& s) { parse_images(s); }},
      {ann, [](const std::string& s) { parse_annotations(s); }},
      {pred, [](const std::string& s) { parse_predictions(s); }},
      {tracks, [](const std::string& s) { parse_tracks(s); }},
      {canonical_dump(to_json(default_scene_spec())),
       [](const std::string& s) { parse_scene_spec(s); }}};
  std::mt19937_64 rng(113);
  const std::string alphabet = "0123456789-.e,:[]{}\" nabcxyzSIMPLE_RADIAL\n#";
  int located = 0, total = 0;
  for (const auto& [text, parse] : parsers) {
    std::uniform_int_distribution<std::size_t> pos(0, text.size() - 1);
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    for (int trial = 0; trial < 1500; ++trial) {
      std::string mutated = text;
      switch (trial % 4) {
        case 0: mutated[pos(rng)] = alphabet[pick(rng)]; break;
        case 1: mutated.erase(pos(rng), 1 + trial % 7); break;
        case 2: mutated.insert(pos(rng), 1, alphabet[pick(rng)]); break;
        case 3: mutated.resize(pos(rng)); break;
      }
      ++total;
      try {
        parse(mutated);
      } catch (const Error& e) {
        ++located;
        check.expect(!e.location().empty(), std::string("unlocated error: ") + e.what());
      } catch (const std::exception& e) {
        check.expect(false, std::string("foreign exception: ") + e.what());
      }
    }
  }
  return check.outcome("5 fixtures bit-identical; " + std::to_string(located) + "/" + std::to_string(total) +
                       " corrupted inputs rejected with a location, rest parsed");
}

// 10
Outcome pipeline_smoke() {
  Checker check;
  const auto start = std::chrono::steady_clock::now();
  fixtures::TempDir dir("acc_pipeline");
  const auto stage = [&](const std::string& name, int threads) {
    const fs::path run = dir / name;
    const std::string t = std::to_string(threads);
    const auto s = [&](const char* f) { return (run / f).string(); };
    fs::create_directories(run);
    std::ostringstream eval_out, roc_out, err;
    bool ok = run_cli({"--threads", t, "synth", "--out", s("fx")}, eval_out, err) == 0;
    ok = ok && run_cli({"--threads", t, "fuse", "--detections", s("fx/predictions.json"), "--out", s("fused.json")},
                       eval_out, err) == 0;
    ok = ok && run_cli({"--threads", t, "triangulate", "--predictions", s("fused.json"), "--colmap", s("fx/colmap"),
                        "--out", s("refined.json"), "--diagnostics", s("diag.json")},
                       eval_out, err) == 0;
    ok = ok && run_cli({"--threads", t, "evaluate", "--annotations", s("fx/annotations.json"), "--predictions",
                        s("refined.json"), "--out", s("report.json")},
                       eval_out, err) == 0;
    ok = ok && run_cli({"--threads", t, "roc", "--annotations", s("fx/annotations.json"), "--predictions",
                        s("refined.json"), "--out", s("roc.json")},
                       roc_out, err) == 0;
    check.expect(ok, name + ": " + err.str());
    std::string all = eval_out.str() + roc_out.str();
    for (const char* f : {"fused.json", "refined.json", "diag.json", "report.json", "roc.json"}) {
      if (fs::exists(run / f)) all += read_text_file(run / f);
    }
    return all;
  };
  const std::string first = stage("single", 1);
  const double single_secs = seconds_since(start);
  const std::string again = stage("again", 1);
  const std::string threaded = stage("threaded", 4);
  check.expect(first == again, "reports differ between runs");
  check.expect(first == threaded, "reports differ between thread counts");
  check.expect(single_secs < 30.0, fmt("took %.2f s", single_secs));
  return check.outcome("single-threaded run " + fmt("%.2f s", single_secs) + "; byte-stable across runs and threads");
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria = {
      {"metric oracle equivalence", metric_oracle_equivalence},
      {"IoU+n semantics for an all-Absent predictor", all_absent_predictor},
      {"STIoU laws", stiou_laws},
      {"AUC equals Mann-Whitney", auc_mann_whitney},
      {"triangulation round-trip", triangulation_round_trip},
      {"converge_point against descent oracle", converge_point_oracle},
      {"tracking fusion", tracking_fusion},
      {"Kalman and GIoU sanity", kalman_giou_sanity},
      {"parser round-trips", parser_round_trips},
      {"pipeline smoke", pipeline_smoke},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
