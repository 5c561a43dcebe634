#include "vrec/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "vrec/colmap_io.hpp"
#include "vrec/errors.hpp"
#include "vrec/fusion.hpp"
#include "vrec/json_io.hpp"
#include "vrec/svg.hpp"
#include "vrec/synth.hpp"

namespace vrec {

namespace fs = std::filesystem;
using schema::child;

namespace {

ReplaceMode parse_mode(const std::string& text, const std::string& where) {
  if (text == "always") return ReplaceMode::kAlways;
  if (text == "only-absent") return ReplaceMode::kOnlyAbsent;
  if (text == "never") return ReplaceMode::kNever;
  throw Error(ErrorCode::kInvalidArgument,
              "expected always, only-absent or never, got \"" + text + "\"", where);
}

void read_number(const Json& obj, std::string_view key, const std::string& ptr, double& target) {
  if (const Json* v = schema::optional(obj, key)) target = schema::expect_number(*v, child(ptr, key));
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. The first failure in
// index order is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  std::vector<std::exception_ptr> errors(n);
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), std::max<std::size_t>(n, 1));
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string pct(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", *v * 100.0);
  return buf;
}

void table_row(std::ostringstream& s, const std::vector<std::string>& cells) {
  static const int widths[] = {-20, 6, 7, 8, 8, 9, 7, 7};
  for (std::size_t i = 0; i < cells.size(); ++i) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%*s", widths[i], cells[i].c_str());
    s << (i ? "  " : "") << buf;
  }
  s << '\n';
}

void report_row(std::ostringstream& s, const std::string& name, const SplitReport& r) {
  table_row(s, {name, std::to_string(r.n_clips), std::to_string(r.n_images), pct(r.mstiou),
                pct(r.miou_plus_n), pct(r.map50_plus_n), pct(r.miou), pct(r.map50)});
}

void write_json(const std::string& path, const Json& value) {
  write_text_file(path, canonical_dump(value));
}

std::map<std::string, std::map<std::string, std::int64_t>> parse_mapping(std::string_view text) {
  const Json root = parse_json(text, "mapping");
  if (!root.is_object()) schema::fail("", "expected an object of clip_id -> {name: frame_index}");
  std::map<std::string, std::map<std::string, std::int64_t>> mapping;
  for (const auto& [clip_id, names] : root.items()) {
    const std::string ptr = child("", clip_id);
    if (!names.is_object()) schema::fail(ptr, "expected an object of name -> frame_index");
    for (const auto& [name, frame] : names.items()) {
      mapping[clip_id][name] = schema::expect_integer(frame, child(ptr, name));
    }
  }
  return mapping;
}

struct Globals {
  std::string config_path;
  int threads = 1;
  std::optional<std::uint64_t> seed;

  PipelineConfig config() const {
    return config_path.empty() ? PipelineConfig{}
                               : parse_pipeline_config(read_text_file(config_path));
  }
};

// --- evaluate --------------------------------------------------------------

struct EvaluateArgs {
  std::string annotations, predictions, group_by, out;
  bool pooled = false;
};

void cmd_evaluate(const Globals& g, const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<std::string> warnings;
  const std::vector<ClipEvaluation> clips =
      pair_clips(load_annotations(a.annotations), load_predictions(a.predictions), &warnings);
  for (const std::string& w : warnings) err << "warning: " << w << '\n';
  std::optional<GroupBy> group_by;
  if (a.group_by == "uniqueness") group_by = GroupBy::kUniqueness;
  if (a.group_by == "movement") group_by = GroupBy::kMovement;
  const EvaluationReport report = evaluate_split(
      clips, a.pooled ? Aggregation::kPooledImages : Aggregation::kClipMean, group_by, g.threads);
  out << format_report_table(report);
  if (!a.out.empty()) write_json(a.out, to_json(report));
}

// --- roc -------------------------------------------------------------------

struct RocArgs {
  std::string annotations, predictions, out, plot;
};

void cmd_roc(const RocArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<std::string> warnings;
  const std::vector<ClipEvaluation> clips =
      pair_clips(load_annotations(a.annotations), load_predictions(a.predictions), &warnings);
  for (const std::string& w : warnings) err << "warning: " << w << '\n';
  const std::vector<ScoredLabel> samples = roc_samples(clips);
  const RocCurve curve = roc_curve(samples);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "AUC %.1f\n", curve.auc * 100.0);
  out << buf;
  if (!a.out.empty()) write_json(a.out, to_json(curve));
  if (!a.plot.empty()) write_text_file(a.plot, roc_svg(curve, "no-object detection"));
}

// --- fuse ------------------------------------------------------------------

struct FuseArgs {
  std::string detections, out, tracks_out;
  std::optional<double> threshold;
};

bool single_candidate(const PredictedClip& clip) {
  return std::all_of(clip.frames.begin(), clip.frames.end(),
                     [](const PredictedFrame& f) { return f.boxes.size() <= 1; });
}

void cmd_fuse(const Globals& g, const FuseArgs& a) {
  const PipelineConfig cfg = g.config();
  cfg.tracker.validate();
  const std::optional<double> threshold = a.threshold ? a.threshold : cfg.no_object_threshold;
  const PredictionFile input = load_predictions(a.detections);

  PredictionFile fused;
  fused.clips.resize(input.clips.size());
  TrackFile tracks;
  tracks.clips.resize(input.clips.size());

  parallel_for(input.clips.size(), g.threads, [&](std::size_t c) {
    const PredictedClip& clip = input.clips[c];
    DetectionStream stream;
    for (std::size_t fi = 0; fi < clip.frames.size(); ++fi) {
      const PredictedFrame& frame = clip.frames[fi];
      std::vector<Detection>& dets = stream[frame.frame_index];
      for (std::size_t b = 0; b < frame.boxes.size(); ++b) {
        const PredictedBox& box = frame.boxes[b];
        if (!box.score) {
          throw Error(ErrorCode::kSchemaViolation, "fusion needs a score for every box",
                      "/clips/" + std::to_string(c) + "/frames/" + std::to_string(fi) +
                          "/boxes/" + std::to_string(b));
        }
        dets.push_back({frame.frame_index, box.box, *box.score});
      }
    }
    TrackingResult tracking = run_tracker(stream, cfg.tracker);
    const std::map<std::int64_t, FrameSelection> selection = fuse_scores(tracking, threshold);

    tracks.clips[c].clip_id = clip.clip_id;
    for (const Track& t : tracking.tracks) tracks.clips[c].tracks.push_back(to_record(t));

    // With at most one candidate per frame and no threshold there is nothing
    // to choose, so the stream is passed through untouched.
    if (single_candidate(clip) && !threshold) {
      fused.clips[c] = clip;
      return;
    }
    PredictedClip& result = fused.clips[c];
    result.clip_id = clip.clip_id;
    for (const PredictedFrame& frame : clip.frames) {
      PredictedFrame f{frame.frame_index, {}};
      const auto it = selection.find(frame.frame_index);
      if (it != selection.end() && it->second.box.present()) {
        f.boxes.push_back({it->second.box, it->second.score});
      }
      result.frames.push_back(std::move(f));
    }
  });

  write_predictions(a.out, fused);
  if (!a.tracks_out.empty()) write_tracks(a.tracks_out, tracks);
}

// --- triangulate -----------------------------------------------------------

struct TriangulateArgs {
  std::string predictions, colmap, mode, out, diagnostics, mapping;
};

Json point_json(const Point3& p) { return Json::array({p.x(), p.y(), p.z()}); }

Json diagnostics_json(const std::string& clip_id, const RefineResult& r) {
  Json d = {{"clip_id", clip_id},
            {"failed", r.failed},
            {"replaced_frames", Json(std::vector<std::int64_t>(r.replaced_frames.begin(),
                                                               r.replaced_frames.end()))}};
  if (r.failed) d["failure"] = r.failure;
  if (r.triangulation) {
    const BoxTriangulation& t = *r.triangulation;
    d["contributing_frames"] = t.contributing_frames;
    Json corners = Json::array();
    for (std::size_t i = 0; i < 4; ++i) {
      const CornerDiagnostics& cd = t.diagnostics[i];
      corners.push_back({{"corner", corner_name(kCorners[i])},
                         {"point", point_json(t.corners[i])},
                         {"n_rays", cd.n_rays},
                         {"n_inliers", cd.n_inliers},
                         {"residual", cd.residual},
                         {"relative_residual", cd.relative_residual}});
    }
    d["corners"] = corners;
  }
  return d;
}

void cmd_triangulate(const Globals& g, const TriangulateArgs& a) {
  PipelineConfig cfg = g.config();
  if (!a.mode.empty()) cfg.triangulation.replace_mode = parse_mode(a.mode, "--mode");
  cfg.triangulation.validate();
  const PredictionFile input = load_predictions(a.predictions);
  std::map<std::string, std::map<std::string, std::int64_t>> mapping;
  if (!a.mapping.empty()) mapping = parse_mapping(read_text_file(a.mapping));

  // A directory holding cameras.txt serves every clip; otherwise each clip
  // has its own subdirectory.
  const fs::path root(a.colmap);
  std::optional<ColmapReconstruction> shared;
  if (fs::exists(root / "cameras.txt")) shared = read_reconstruction(root);

  PredictionFile refined;
  refined.clips.resize(input.clips.size());
  std::vector<Json> diagnostics(input.clips.size());

  parallel_for(input.clips.size(), g.threads, [&](std::size_t c) {
    const PredictedClip& clip = input.clips[c];
    const ColmapReconstruction rec = shared ? *shared : read_reconstruction(root / clip.clip_id);
    std::vector<std::int64_t> indices;
    std::map<std::int64_t, BBox2D> boxes;
    std::map<std::int64_t, std::optional<double>> scores;
    for (const PredictedFrame& frame : clip.frames) {
      indices.push_back(frame.frame_index);
      const PredictedBox best = top1(frame);
      boxes[frame.frame_index] = best.box;
      scores[frame.frame_index] = best.score;
    }
    const auto m = mapping.find(clip.clip_id);
    const std::vector<CalibratedFrame> frames =
        calibrated_frames(rec, indices, m == mapping.end() ? nullptr : &m->second);
    const RefineResult r = refine_clip(boxes, frames, rec.cameras, cfg.triangulation);

    PredictedClip& result = refined.clips[c];
    result = clip;
    for (PredictedFrame& frame : result.frames) {
      if (!r.replaced_frames.count(frame.frame_index)) continue;
      frame.boxes = {{r.boxes.at(frame.frame_index), scores[frame.frame_index]}};
    }
    diagnostics[c] = diagnostics_json(clip.clip_id, r);
  });

  write_predictions(a.out, refined);
  if (!a.diagnostics.empty()) write_json(a.diagnostics, {{"clips", diagnostics}});
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
  std::string spec, out;
};

void cmd_synth(const Globals& g, const SynthArgs& a) {
  SceneSpec spec = a.spec.empty() ? default_scene_spec() : parse_scene_spec(read_text_file(a.spec));
  if (g.seed) spec.seed = *g.seed;
  write_fixture(a.out, spec, generate(spec));
}

}  // namespace

PipelineConfig parse_pipeline_config(std::string_view text) {
  const Json root = parse_json(text, "config");
  schema::expect_object(root, "", {"tracker", "triangulation", "fusion"});
  PipelineConfig cfg;
  if (const Json* t = schema::optional(root, "tracker")) {
    const std::string p = "/tracker";
    schema::expect_object(*t, p,
                          {"track_high_thresh", "track_low_thresh", "match_score_thresh",
                           "match_giou_thresh", "nms_iou_thresh", "max_lost_frames",
                           "strict_gate_only"});
    TrackerConfig& tc = cfg.tracker;
    read_number(*t, "track_high_thresh", p, tc.track_high_thresh);
    read_number(*t, "track_low_thresh", p, tc.track_low_thresh);
    read_number(*t, "match_score_thresh", p, tc.match_score_thresh);
    read_number(*t, "match_giou_thresh", p, tc.match_giou_thresh);
    read_number(*t, "nms_iou_thresh", p, tc.nms_iou_thresh);
    if (const Json* v = schema::optional(*t, "max_lost_frames")) {
      tc.max_lost_frames = static_cast<int>(schema::expect_integer(*v, p + "/max_lost_frames"));
    }
    if (const Json* v = schema::optional(*t, "strict_gate_only")) {
      tc.strict_gate_only = schema::expect_bool(*v, p + "/strict_gate_only");
    }
    tc.validate();
  }
  if (const Json* t = schema::optional(root, "triangulation")) {
    const std::string p = "/triangulation";
    schema::expect_object(*t, p,
                          {"parallel_angle_deg", "outlier_mad_factor", "min_outlier_radius",
                           "min_inlier_rays", "max_relative_residual", "replace_mode"});
    TriangulationConfig& tc = cfg.triangulation;
    if (const Json* v = schema::optional(*t, "parallel_angle_deg")) {
      const double deg = schema::expect_number(*v, p + "/parallel_angle_deg");
      tc.parallel_cos_thresh = std::cos(deg * std::numbers::pi / 180.0);
    }
    read_number(*t, "outlier_mad_factor", p, tc.outlier_mad_factor);
    read_number(*t, "min_outlier_radius", p, tc.min_outlier_radius);
    read_number(*t, "max_relative_residual", p, tc.max_relative_residual);
    if (const Json* v = schema::optional(*t, "min_inlier_rays")) {
      tc.min_inlier_rays = static_cast<int>(schema::expect_integer(*v, p + "/min_inlier_rays"));
    }
    if (const Json* v = schema::optional(*t, "replace_mode")) {
      tc.replace_mode = parse_mode(schema::expect_string(*v, p + "/replace_mode"),
                                   p + "/replace_mode");
    }
    tc.validate();
  }
  if (const Json* f = schema::optional(root, "fusion")) {
    schema::expect_object(*f, "/fusion", {"no_object_threshold"});
    if (const Json* v = schema::optional(*f, "no_object_threshold")) {
      cfg.no_object_threshold = schema::expect_number(*v, "/fusion/no_object_threshold");
    }
  }
  return cfg;
}

std::string format_report_table(const EvaluationReport& report) {
  std::ostringstream s;
  const std::vector<std::string> header = {"split", "clips", "images", "mSTIoU",
                                           "mIoU+n", "mAP@50+n", "mIoU", "mAP@50"};
  table_row(s, header);
  report_row(s, "all", report.split);
  if (report.group_by) {
    const std::string key = report.group_by == GroupBy::kUniqueness ? "uniqueness" : "movement";
    for (const auto& [value, group] : report.groups) {
      s << '\n';
      table_row(s, header);
      report_row(s, key + "=" + value, group);
    }
  }
  return s.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evaluation and refinement tools for video referring expression comprehension",
               "vrec"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "JSON file with tracker/triangulation/fusion sections")
      ->check(CLI::ExistingFile);
  app.add_option("--threads", g.threads, "Worker threads for clip-parallel work")
      ->check(CLI::PositiveNumber);
  CLI::Option* seed_opt = app.add_option("--seed", seed, "Overrides the synth spec seed");

  EvaluateArgs ev;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Score predictions against annotations");
  evaluate->add_option("--annotations", ev.annotations)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--predictions", ev.predictions)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--group-by", ev.group_by)
      ->check(CLI::IsMember({"uniqueness", "movement"}));
  evaluate->add_flag("--pooled-images", ev.pooled, "Pool image-level metrics over the split");
  evaluate->add_option("--out", ev.out, "JSON report");

  RocArgs ra;
  CLI::App* roc = app.add_subcommand("roc", "ROC of no-referred-object detection");
  roc->add_option("--annotations", ra.annotations)->required()->check(CLI::ExistingFile);
  roc->add_option("--predictions", ra.predictions)->required()->check(CLI::ExistingFile);
  roc->add_option("--out", ra.out, "JSON curve");
  roc->add_option("--plot", ra.plot, "SVG plot");

  FuseArgs fa;
  double threshold = 0.0;
  CLI::App* fuse = app.add_subcommand("fuse", "Track detections and re-select boxes by fused score");
  fuse->add_option("--detections", fa.detections)->required()->check(CLI::ExistingFile);
  fuse->add_option("--config", g.config_path)->check(CLI::ExistingFile);
  fuse->add_option("--out", fa.out)->required();
  CLI::Option* threshold_opt =
      fuse->add_option("--threshold", threshold, "Fused scores below this become no-object");
  fuse->add_option("--tracks-out", fa.tracks_out, "JSON dump of the tracks");

  TriangulateArgs ta;
  CLI::App* triangulate =
      app.add_subcommand("triangulate", "Refine boxes through 3D corner triangulation");
  triangulate->add_option("--predictions", ta.predictions)->required()->check(CLI::ExistingFile);
  triangulate->add_option("--colmap", ta.colmap)->required()->check(CLI::ExistingDirectory);
  triangulate->add_option("--mode", ta.mode)
      ->check(CLI::IsMember({"always", "only-absent", "never"}));
  triangulate->add_option("--out", ta.out)->required();
  triangulate->add_option("--diagnostics", ta.diagnostics);
  triangulate->add_option("--mapping", ta.mapping, "JSON clip_id -> {image name: frame_index}")
      ->check(CLI::ExistingFile);
  triangulate->add_option("--config", g.config_path)->check(CLI::ExistingFile);

  SynthArgs sa;
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic fixture directory");
  synth->add_option("--spec", sa.spec, "Scene spec JSON (default scene when omitted)")
      ->check(CLI::ExistingFile);
  synth->add_option("--out", sa.out)->required();
  synth->add_option("--seed", seed, "Overrides the spec seed");

  std::vector<const char*> argv = {"vrec"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  if (seed_opt->count() > 0 || synth->count("--seed") > 0) g.seed = seed;
  if (threshold_opt->count() > 0) fa.threshold = threshold;

  try {
    if (evaluate->parsed()) cmd_evaluate(g, ev, out, err);
    if (roc->parsed()) cmd_roc(ra, out, err);
    if (fuse->parsed()) cmd_fuse(g, fa);
    if (triangulate->parsed()) cmd_triangulate(g, ta);
    if (synth->parsed()) cmd_synth(g, sa);
  } catch (const Error& e) {
    err << "error [" << error_code_name(e.code()) << "] " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace vrec
