#include "vrec/json_io.hpp"

#include <set>

#include "vrec/errors.hpp"

namespace vrec {

using schema::child;

std::string_view to_string(Uniqueness u) {
  return u == Uniqueness::kSingle ? "single" : "multiple";
}

std::string_view to_string(Movement m) {
  return m == Movement::kStatic ? "static" : "moving";
}

std::string_view to_string(TrackStatus s) {
  switch (s) {
    case TrackStatus::kActive: return "active";
    case TrackStatus::kLost: return "lost";
    case TrackStatus::kRemoved: return "removed";
  }
  return "active";
}

Json box_to_json(const BBox2D& box) {
  if (!box.present()) return nullptr;
  return Json::array({box.x1(), box.y1(), box.x2(), box.y2()});
}

BBox2D box_from_json(const Json& value, const std::string& ptr, bool allow_null) {
  if (value.is_null()) {
    if (!allow_null) schema::fail(ptr, "box may not be null here");
    return BBox2D::absent();
  }
  const Json& arr = schema::expect_array(value, ptr);
  if (arr.size() != 4) schema::fail(ptr, "box must be [x1, y1, x2, y2]");
  double c[4];
  for (std::size_t i = 0; i < 4; ++i) c[i] = schema::expect_number(arr[i], child(ptr, i));
  if (c[0] > c[2] || c[1] > c[3]) schema::fail(ptr, "box requires x1 <= x2 and y1 <= y2");
  const BBox2D box = BBox2D::from_corners(c[0], c[1], c[2], c[3]);
  if (!box.present()) schema::fail(ptr, "zero-area box; encode a missing box as null");
  return box;
}

namespace {

Json optional_number(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <typename Frame>
void check_increasing(const std::vector<Frame>& frames, const std::string& ptr) {
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i].frame_index <= frames[i - 1].frame_index) {
      schema::fail(child(child(ptr, i), "frame_index"), "frame_index must strictly increase");
    }
  }
}

void check_unique_clip(std::set<std::string>& seen, const std::string& id,
                       const std::string& ptr) {
  if (!seen.insert(id).second) schema::fail(ptr, "duplicate clip_id '" + id + "'");
}

std::int64_t frame_index_field(const Json& frame, const std::string& ptr) {
  const std::int64_t v =
      schema::expect_integer(schema::require(frame, "frame_index", ptr), child(ptr, "frame_index"));
  if (v < 0) schema::fail(child(ptr, "frame_index"), "frame_index must be >= 0");
  return v;
}

ClipTags parse_tags(const Json& v, const std::string& ptr) {
  schema::expect_object(v, ptr, {"uniqueness", "movement"});
  ClipTags tags;
  if (const Json* u = schema::optional(v, "uniqueness")) {
    const std::string s = schema::expect_string(*u, child(ptr, "uniqueness"));
    if (s == "single") {
      tags.uniqueness = Uniqueness::kSingle;
    } else if (s == "multiple") {
      tags.uniqueness = Uniqueness::kMultiple;
    } else {
      schema::fail(child(ptr, "uniqueness"), "expected \"single\" or \"multiple\"");
    }
  }
  if (const Json* m = schema::optional(v, "movement")) {
    const std::string s = schema::expect_string(*m, child(ptr, "movement"));
    if (s == "static") {
      tags.movement = Movement::kStatic;
    } else if (s == "moving") {
      tags.movement = Movement::kMoving;
    } else {
      schema::fail(child(ptr, "movement"), "expected \"static\" or \"moving\"");
    }
  }
  return tags;
}

Json root_clips(std::string_view text, const char* source, Json& root) {
  root = parse_json(text, source);
  schema::expect_object(root, "", {"clips"});
  return schema::expect_array(schema::require(root, "clips", ""), "/clips");
}

}  // namespace

const PredictedClip* PredictionFile::find(std::string_view clip_id) const {
  for (const auto& c : clips) {
    if (c.clip_id == clip_id) return &c;
  }
  return nullptr;
}

AnnotationFile parse_annotations(std::string_view text) {
  Json root;
  const Json clips = root_clips(text, "annotations", root);
  AnnotationFile file;
  std::set<std::string> ids;
  for (std::size_t ci = 0; ci < clips.size(); ++ci) {
    const std::string cp = child("/clips", ci);
    const Json& c = clips[ci];
    schema::expect_object(c, cp, {"clip_id", "expression", "fps_annotated", "frames", "tags"});
    AnnotatedClip clip;
    clip.clip_id = schema::expect_string(schema::require(c, "clip_id", cp), child(cp, "clip_id"));
    check_unique_clip(ids, clip.clip_id, child(cp, "clip_id"));
    clip.expression =
        schema::expect_string(schema::require(c, "expression", cp), child(cp, "expression"));
    if (const Json* fps = schema::optional(c, "fps_annotated")) {
      clip.fps_annotated = schema::expect_number(*fps, child(cp, "fps_annotated"));
      if (!(clip.fps_annotated > 0.0)) {
        schema::fail(child(cp, "fps_annotated"), "fps_annotated must be positive");
      }
    }
    if (const Json* tags = schema::optional(c, "tags")) {
      clip.tags = parse_tags(*tags, child(cp, "tags"));
    }
    const std::string fp = child(cp, "frames");
    const Json& frames = schema::expect_array(schema::require(c, "frames", cp), fp);
    for (std::size_t fi = 0; fi < frames.size(); ++fi) {
      const std::string p = child(fp, fi);
      schema::expect_object(frames[fi], p, {"frame_index", "gt_box"});
      AnnotatedFrame frame;
      frame.frame_index = frame_index_field(frames[fi], p);
      frame.gt = box_from_json(schema::require(frames[fi], "gt_box", p), child(p, "gt_box"), true);
      clip.frames.push_back(frame);
    }
    check_increasing(clip.frames, fp);
    file.clips.push_back(std::move(clip));
  }
  return file;
}

PredictionFile parse_predictions(std::string_view text) {
  Json root;
  const Json clips = root_clips(text, "predictions", root);
  PredictionFile file;
  std::set<std::string> ids;
  for (std::size_t ci = 0; ci < clips.size(); ++ci) {
    const std::string cp = child("/clips", ci);
    const Json& c = clips[ci];
    schema::expect_object(c, cp, {"clip_id", "frames"});
    PredictedClip clip;
    clip.clip_id = schema::expect_string(schema::require(c, "clip_id", cp), child(cp, "clip_id"));
    check_unique_clip(ids, clip.clip_id, child(cp, "clip_id"));
    const std::string fp = child(cp, "frames");
    const Json& frames = schema::expect_array(schema::require(c, "frames", cp), fp);
    for (std::size_t fi = 0; fi < frames.size(); ++fi) {
      const std::string p = child(fp, fi);
      schema::expect_object(frames[fi], p, {"frame_index", "boxes"});
      PredictedFrame frame;
      frame.frame_index = frame_index_field(frames[fi], p);
      const std::string bp = child(p, "boxes");
      const Json& boxes = schema::expect_array(schema::require(frames[fi], "boxes", p), bp);
      for (std::size_t bi = 0; bi < boxes.size(); ++bi) {
        const std::string q = child(bp, bi);
        schema::expect_object(boxes[bi], q, {"box", "score"});
        PredictedBox pb;
        pb.box = box_from_json(schema::require(boxes[bi], "box", q), child(q, "box"), false);
        if (const Json* s = schema::optional(boxes[bi], "score"); s && !s->is_null()) {
          pb.score = schema::expect_number(*s, child(q, "score"));
        }
        frame.boxes.push_back(pb);
      }
      clip.frames.push_back(std::move(frame));
    }
    check_increasing(clip.frames, fp);
    file.clips.push_back(std::move(clip));
  }
  return file;
}

TrackRecord to_record(const Track& track) {
  return {track.track_id, track.status, track.fused_score, track.entries};
}

TrackFile parse_tracks(std::string_view text) {
  Json root;
  const Json clips = root_clips(text, "tracks", root);
  TrackFile file;
  std::set<std::string> ids;
  for (std::size_t ci = 0; ci < clips.size(); ++ci) {
    const std::string cp = child("/clips", ci);
    const Json& c = clips[ci];
    schema::expect_object(c, cp, {"clip_id", "tracks"});
    ClipTracks clip;
    clip.clip_id = schema::expect_string(schema::require(c, "clip_id", cp), child(cp, "clip_id"));
    check_unique_clip(ids, clip.clip_id, child(cp, "clip_id"));
    const std::string tp = child(cp, "tracks");
    const Json& tracks = schema::expect_array(schema::require(c, "tracks", cp), tp);
    for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
      const std::string p = child(tp, ti);
      const Json& t = tracks[ti];
      schema::expect_object(t, p, {"track_id", "status", "fused_score", "entries"});
      TrackRecord rec;
      rec.track_id = static_cast<int>(
          schema::expect_integer(schema::require(t, "track_id", p), child(p, "track_id")));
      const std::string status =
          schema::expect_string(schema::require(t, "status", p), child(p, "status"));
      if (status == "active") {
        rec.status = TrackStatus::kActive;
      } else if (status == "lost") {
        rec.status = TrackStatus::kLost;
      } else if (status == "removed") {
        rec.status = TrackStatus::kRemoved;
      } else {
        schema::fail(child(p, "status"), "expected \"active\", \"lost\" or \"removed\"");
      }
      if (const Json* f = schema::optional(t, "fused_score"); f && !f->is_null()) {
        rec.fused_score = schema::expect_number(*f, child(p, "fused_score"));
      }
      const std::string ep = child(p, "entries");
      const Json& entries = schema::expect_array(schema::require(t, "entries", p), ep);
      for (std::size_t ei = 0; ei < entries.size(); ++ei) {
        const std::string q = child(ep, ei);
        schema::expect_object(entries[ei], q, {"frame_index", "box", "score", "detection_index"});
        TrackEntry e;
        e.frame_index = frame_index_field(entries[ei], q);
        e.box = box_from_json(schema::require(entries[ei], "box", q), child(q, "box"), false);
        e.score = schema::expect_number(schema::require(entries[ei], "score", q), child(q, "score"));
        const std::int64_t di = schema::expect_integer(
            schema::require(entries[ei], "detection_index", q), child(q, "detection_index"));
        if (di < 0) schema::fail(child(q, "detection_index"), "must be >= 0");
        e.detection_index = static_cast<std::size_t>(di);
        rec.entries.push_back(e);
      }
      check_increasing(rec.entries, ep);
      clip.tracks.push_back(std::move(rec));
    }
    file.clips.push_back(std::move(clip));
  }
  return file;
}

Json to_json(const AnnotationFile& file) {
  Json clips = Json::array();
  for (const auto& c : file.clips) {
    Json frames = Json::array();
    for (const auto& f : c.frames) {
      frames.push_back({{"frame_index", f.frame_index}, {"gt_box", box_to_json(f.gt)}});
    }
    Json clip = {{"clip_id", c.clip_id},
                 {"expression", c.expression},
                 {"fps_annotated", c.fps_annotated},
                 {"frames", frames}};
    if (c.tags.uniqueness || c.tags.movement) {
      Json tags = Json::object();
      if (c.tags.uniqueness) tags["uniqueness"] = to_string(*c.tags.uniqueness);
      if (c.tags.movement) tags["movement"] = to_string(*c.tags.movement);
      clip["tags"] = tags;
    }
    clips.push_back(clip);
  }
  return {{"clips", clips}};
}

Json to_json(const PredictionFile& file) {
  Json clips = Json::array();
  for (const auto& c : file.clips) {
    Json frames = Json::array();
    for (const auto& f : c.frames) {
      Json boxes = Json::array();
      for (const auto& b : f.boxes) {
        Json jb = {{"box", box_to_json(b.box)}};
        if (b.score) jb["score"] = *b.score;
        boxes.push_back(jb);
      }
      frames.push_back({{"frame_index", f.frame_index}, {"boxes", boxes}});
    }
    clips.push_back({{"clip_id", c.clip_id}, {"frames", frames}});
  }
  return {{"clips", clips}};
}

Json to_json(const TrackFile& file) {
  Json clips = Json::array();
  for (const auto& c : file.clips) {
    Json tracks = Json::array();
    for (const auto& t : c.tracks) {
      Json entries = Json::array();
      for (const auto& e : t.entries) {
        entries.push_back({{"frame_index", e.frame_index},
                           {"box", box_to_json(e.box)},
                           {"score", e.score},
                           {"detection_index", e.detection_index}});
      }
      tracks.push_back({{"track_id", t.track_id},
                        {"status", to_string(t.status)},
                        {"fused_score", optional_number(t.fused_score)},
                        {"entries", entries}});
    }
    clips.push_back({{"clip_id", c.clip_id}, {"tracks", tracks}});
  }
  return {{"clips", clips}};
}

Json to_json(const SplitReport& r) {
  return {{"aggregation", r.aggregation == Aggregation::kClipMean ? "clip_mean" : "pooled_images"},
          {"mSTIoU", r.mstiou},
          {"mIoU+n", r.miou_plus_n},
          {"mAP@50+n", r.map50_plus_n},
          {"mIoU", optional_number(r.miou)},
          {"mAP@50", optional_number(r.map50)},
          {"n_clips", r.n_clips},
          {"n_images", r.n_images},
          {"n_images_with_target", r.n_images_with_target},
          {"n_vacuous_clips", r.n_vacuous_clips}};
}

Json to_json(const ClipMetrics& c) {
  return {{"clip_id", c.clip_id},
          {"stiou", c.stiou},
          {"stiou_vacuous", c.stiou_vacuous},
          {"mean_iou", optional_number(c.mean_iou)},
          {"ap50", optional_number(c.ap50)},
          {"mean_iou_plus_n", c.mean_iou_plus_n},
          {"ap50_plus_n", c.ap50_plus_n},
          {"n_frames", c.n_frames},
          {"n_target_frames", c.n_target_frames}};
}

Json to_json(const RocCurve& curve) {
  Json points = Json::array();
  for (const RocPoint& p : curve.points) {
    points.push_back({{"threshold", std::isfinite(p.threshold) ? Json(p.threshold) : Json(nullptr)},
                      {"fpr", p.fpr},
                      {"tpr", p.tpr}});
  }
  return {{"auc", curve.auc}, {"points", points}};
}

AnnotationFile load_annotations(const std::filesystem::path& path) {
  return parse_annotations(read_text_file(path));
}

PredictionFile load_predictions(const std::filesystem::path& path) {
  return parse_predictions(read_text_file(path));
}

TrackFile load_tracks(const std::filesystem::path& path) {
  return parse_tracks(read_text_file(path));
}

void write_annotations(const std::filesystem::path& path, const AnnotationFile& file) {
  write_text_file(path, canonical_dump(to_json(file)));
}

void write_predictions(const std::filesystem::path& path, const PredictionFile& file) {
  write_text_file(path, canonical_dump(to_json(file)));
}

void write_tracks(const std::filesystem::path& path, const TrackFile& file) {
  write_text_file(path, canonical_dump(to_json(file)));
}

}  // namespace vrec
