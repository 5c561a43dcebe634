#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "vrec/cli.hpp"
#include "vrec/errors.hpp"
#include "vrec/json_io.hpp"

using namespace vrec;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string p(const fs::path& path) { return path.string(); }

void write_spec(const fs::path& path, const std::string& json) { write_text_file(path, json); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit nonzero") {
    CHECK(run({}).code != 0);
    CHECK(run({"bogus"}).code != 0);
    CHECK(run({"evaluate"}).code != 0);
    const Run help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("evaluate") != std::string::npos);
  }

  TEST_CASE("config parsing") {
    const PipelineConfig cfg = parse_pipeline_config(
        R"({"tracker": {"max_lost_frames": 10, "strict_gate_only": true}, "triangulation": {"replace_mode": "always"}})");
    CHECK(cfg.tracker.max_lost_frames == 10);
    CHECK(cfg.tracker.strict_gate_only);
    CHECK(cfg.tracker.track_high_thresh == 0.1);
    CHECK(cfg.triangulation.replace_mode == ReplaceMode::kAlways);
    CHECK_FALSE(cfg.no_object_threshold);
    CHECK_THROWS_AS(parse_pipeline_config(R"({"tracker": {"typo": 1}})"), Error);
    CHECK_THROWS_AS(parse_pipeline_config(R"({"tracking": {}})"), Error);
    CHECK_THROWS_AS(parse_pipeline_config(R"({"tracker": {"track_low_thresh": 0.5}})"), Error);
    CHECK(parse_pipeline_config("{}").triangulation.replace_mode == ReplaceMode::kOnlyAbsent);
  }

  TEST_CASE("perfect predictions print 100.0 everywhere") {
    fixtures::TempDir dir("cli_eval");
    REQUIRE(run({"synth", "--out", p(dir / "fx")}).code == 0);
    const AnnotationFile ann = load_annotations(dir / "fx/annotations.json");
    PredictionFile perfect;
    for (const AnnotatedClip& c : ann.clips) {
      PredictedClip pc{c.clip_id, {}};
      for (const AnnotatedFrame& f : c.frames) {
        PredictedFrame pf{f.frame_index, {}};
        if (f.gt.present()) pf.boxes.push_back({f.gt, 0.9});
        pc.frames.push_back(pf);
      }
      perfect.clips.push_back(pc);
    }
    write_predictions(dir / "perfect.json", perfect);
    const Run r = run({"evaluate", "--annotations", p(dir / "fx/annotations.json"), "--predictions",
                       p(dir / "perfect.json"), "--out", p(dir / "report.json")});
    REQUIRE(r.code == 0);
    const std::string row = r.out.substr(r.out.find("\nall"));
    std::istringstream cells(row);
    std::string name, clips, images, value;
    cells >> name >> clips >> images;
    for (int i = 0; i < 5; ++i) {
      cells >> value;
      CHECK(value == "100.0");
    }
    CHECK(fs::exists(dir / "report.json"));
  }

  TEST_CASE("group-by prints one table per tag value") {
    fixtures::TempDir dir("cli_group");
    write_spec(dir / "moving.json", R"({"moving_target": true, "clip_prefix": "m"})");
    REQUIRE(run({"synth", "--spec", p(dir / "moving.json"), "--out", p(dir / "m")}).code == 0);
    REQUIRE(run({"synth", "--out", p(dir / "s")}).code == 0);
    AnnotationFile ann = load_annotations(dir / "m/annotations.json");
    PredictionFile pred = load_predictions(dir / "m/predictions.json");
    const AnnotationFile more = load_annotations(dir / "s/annotations.json");
    const PredictionFile more_pred = load_predictions(dir / "s/predictions.json");
    ann.clips.insert(ann.clips.end(), more.clips.begin(), more.clips.end());
    pred.clips.insert(pred.clips.end(), more_pred.clips.begin(), more_pred.clips.end());
    write_annotations(dir / "a.json", ann);
    write_predictions(dir / "p.json", pred);
    const Run r = run({"evaluate", "--annotations", p(dir / "a.json"), "--predictions", p(dir / "p.json"),
                       "--group-by", "movement"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("movement=moving") != std::string::npos);
    CHECK(r.out.find("movement=static") != std::string::npos);
  }

  TEST_CASE("unknown predicted clips are reported") {
    fixtures::TempDir dir("cli_missing");
    write_text_file(dir / "a.json", R"({"clips": [{"clip_id": "a", "expression": "x", "frames": [{"frame_index": 0, "gt_box": null}]}]})");
    write_text_file(dir / "p.json", R"({"clips": [{"clip_id": "ghost", "frames": []}]})");
    const Run r = run({"evaluate", "--annotations", p(dir / "a.json"), "--predictions", p(dir / "p.json")});
    CHECK(r.code != 0);
    CHECK(r.out.empty());
    CHECK(r.err.find("ghost") != std::string::npos);
  }

  TEST_CASE("roc prints the AUC") {
    fixtures::TempDir dir("cli_roc");
    write_text_file(dir / "a.json",
                    R"({"clips": [{"clip_id": "a", "expression": "x", "frames": [)"
                    R"({"frame_index": 0, "gt_box": [0, 0, 1, 1]}, {"frame_index": 1, "gt_box": null}, {"frame_index": 2, "gt_box": [0, 0, 1, 1]}]}]})");
    write_text_file(dir / "sep.json",
                    R"({"clips": [{"clip_id": "a", "frames": [)"
                    R"({"frame_index": 0, "boxes": [{"box": [0, 0, 1, 1], "score": 0.9}]}, {"frame_index": 1, "boxes": [{"box": [0, 0, 1, 1], "score": 0.1}]}, {"frame_index": 2, "boxes": [{"box": [0, 0, 1, 1], "score": 0.8}]}]}]})");
    write_text_file(dir / "flat.json",
                    R"({"clips": [{"clip_id": "a", "frames": [)"
                    R"({"frame_index": 0, "boxes": [{"box": [0, 0, 1, 1], "score": 0.5}]}, {"frame_index": 1, "boxes": [{"box": [0, 0, 1, 1], "score": 0.5}]}, {"frame_index": 2, "boxes": [{"box": [0, 0, 1, 1], "score": 0.5}]}]}]})");
    const Run sep = run({"roc", "--annotations", p(dir / "a.json"), "--predictions", p(dir / "sep.json"),
                         "--out", p(dir / "curve.json"), "--plot", p(dir / "roc.svg")});
    CHECK(sep.code == 0);
    CHECK(sep.out == "AUC 100.0\n");
    CHECK(read_text_file(dir / "roc.svg").find("<svg") == 0);
    CHECK(run({"roc", "--annotations", p(dir / "a.json"), "--predictions", p(dir / "flat.json")}).out == "AUC 50.0\n");
  }

  TEST_CASE("fuse passes single-candidate streams through byte for byte") {
    fixtures::TempDir dir("cli_fuse");
    write_text_file(dir / "cfg.json", "{}");
    PredictionFile single;
    single.clips.push_back({"c", {}});
    for (int i = 0; i < 6; ++i) {
      single.clips[0].frames.push_back({i, {{fixtures::box(10 + i, 10, 50 + i, 60), 0.3 + 0.1 * i}}});
    }
    single.clips[0].frames.push_back({6, {}});
    write_predictions(dir / "in.json", single);
    REQUIRE(run({"fuse", "--detections", p(dir / "in.json"), "--config", p(dir / "cfg.json"), "--out",
                 p(dir / "out.json")}).code == 0);
    CHECK(read_text_file(dir / "out.json") == read_text_file(dir / "in.json"));
  }

  TEST_CASE("fuse restores the tracked box on the crossing scene") {
    fixtures::TempDir dir("cli_cross");
    write_predictions(dir / "in.json", fixtures::crossing_predictions());
    REQUIRE(run({"fuse", "--detections", p(dir / "in.json"), "--out", p(dir / "out.json"), "--tracks-out",
                 p(dir / "tracks.json")}).code == 0);
    const PredictionFile fused = load_predictions(dir / "out.json");
    const fixtures::Crossing c = fixtures::crossing();
    for (int i = 0; i < 10; ++i) {
      REQUIRE(fused.clips[0].frames[i].boxes.size() == 1);
      CHECK(iou(fused.clips[0].frames[i].boxes[0].box, c.a_boxes[i]) == 1.0);
    }
    CHECK(load_tracks(dir / "tracks.json").clips[0].tracks.size() == 2);
  }

  TEST_CASE("fuse needs scores") {
    fixtures::TempDir dir("cli_unscored");
    write_text_file(dir / "in.json", R"({"clips": [{"clip_id": "c", "frames": [{"frame_index": 0, "boxes": [{"box": [0, 0, 1, 1]}, {"box": [5, 5, 6, 6]}]}]}]})");
    const Run r = run({"fuse", "--detections", p(dir / "in.json"), "--out", p(dir / "out.json")});
    CHECK(r.code != 0);
    CHECK(r.err.find("/clips/0/frames/0/boxes/0") != std::string::npos);
  }

  TEST_CASE("triangulate modes and failures") {
    fixtures::TempDir dir("cli_tri");
    write_spec(dir / "orbit.json", R"({"trajectory": {"type": "orbit", "n_frames": 12}, "n_clips": 2})");
    REQUIRE(run({"synth", "--spec", p(dir / "orbit.json"), "--out", p(dir / "fx")}).code == 0);
    const std::string preds = p(dir / "fx/predictions.json");

    REQUIRE(run({"triangulate", "--predictions", preds, "--colmap", p(dir / "fx/colmap"), "--mode", "never",
                 "--out", p(dir / "never.json"), "--diagnostics", p(dir / "diag.json")}).code == 0);
    CHECK(read_text_file(dir / "never.json") == read_text_file(preds));
    const Json diag = parse_json(read_text_file(dir / "diag.json"));
    CHECK(diag["clips"].size() == 2);
    CHECK(diag["clips"][0]["failed"] == false);
    CHECK(diag["clips"][0]["corners"].size() == 4);

    REQUIRE(run({"triangulate", "--predictions", preds, "--colmap", p(dir / "fx/colmap"), "--mode", "always",
                 "--out", p(dir / "always.json")}).code == 0);
    const Run r = run({"evaluate", "--annotations", p(dir / "fx/annotations.json"), "--predictions",
                       p(dir / "always.json")});
    CHECK(r.out.find("100.0") != std::string::npos);

    fs::create_directories(dir / "broken/synth_0000");
    write_text_file(dir / "broken/synth_0000/cameras.txt", "1 SIMPLE_RADIAL 640 480 oops\n");
    write_text_file(dir / "broken/synth_0000/images.txt", "");
    const Run bad = run({"triangulate", "--predictions", preds, "--colmap", p(dir / "broken"), "--out",
                         p(dir / "bad.json")});
    CHECK(bad.code != 0);
    CHECK(bad.err.find("cameras.txt:1") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "bad.json"));
  }

  TEST_CASE("synth is reproducible and the seed flag overrides the spec") {
    fixtures::TempDir dir("cli_synth");
    REQUIRE(run({"synth", "--out", p(dir / "a")}).code == 0);
    REQUIRE(run({"synth", "--out", p(dir / "b")}).code == 0);
    REQUIRE(run({"--seed", "99", "synth", "--out", p(dir / "c")}).code == 0);
    CHECK(read_text_file(dir / "a/predictions.json") == read_text_file(dir / "b/predictions.json"));
    CHECK(read_text_file(dir / "a/predictions.json") != read_text_file(dir / "c/predictions.json"));
    write_spec(dir / "bad.json", R"({"trajectory": {"type": "orbit", "n_frames": 1}})");
    const Run bad = run({"synth", "--spec", p(dir / "bad.json"), "--out", p(dir / "d")});
    CHECK(bad.code != 0);
    CHECK(bad.err.find("DegenerateSpec") != std::string::npos);
  }
}
