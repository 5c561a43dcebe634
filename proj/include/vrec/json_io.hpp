#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vrec/box.hpp"
#include "vrec/json_util.hpp"
#include "vrec/metrics.hpp"
#include "vrec/roc.hpp"
#include "vrec/tracker.hpp"

namespace vrec {

struct AnnotatedFrame {
  std::int64_t frame_index = 0;
  BBox2D gt;

  friend bool operator==(const AnnotatedFrame&, const AnnotatedFrame&) = default;
};

struct AnnotatedClip {
  std::string clip_id;
  std::string expression;
  double fps_annotated = 2.0;
  std::vector<AnnotatedFrame> frames;
  ClipTags tags;

  friend bool operator==(const AnnotatedClip&, const AnnotatedClip&) = default;
};

struct AnnotationFile {
  std::vector<AnnotatedClip> clips;

  friend bool operator==(const AnnotationFile&, const AnnotationFile&) = default;
};

struct PredictedBox {
  BBox2D box;
  std::optional<double> score;

  friend bool operator==(const PredictedBox&, const PredictedBox&) = default;
};

struct PredictedFrame {
  std::int64_t frame_index = 0;
  // Empty means the model predicts that the referred object is absent.
  std::vector<PredictedBox> boxes;

  friend bool operator==(const PredictedFrame&, const PredictedFrame&) = default;
};

struct PredictedClip {
  std::string clip_id;
  std::vector<PredictedFrame> frames;

  friend bool operator==(const PredictedClip&, const PredictedClip&) = default;
};

struct PredictionFile {
  std::vector<PredictedClip> clips;

  const PredictedClip* find(std::string_view clip_id) const;
  friend bool operator==(const PredictionFile&, const PredictionFile&) = default;
};

struct TrackRecord {
  int track_id = 0;
  TrackStatus status = TrackStatus::kActive;
  std::optional<double> fused_score;
  std::vector<TrackEntry> entries;
};

struct ClipTracks {
  std::string clip_id;
  std::vector<TrackRecord> tracks;
};

struct TrackFile {
  std::vector<ClipTracks> clips;
};

TrackRecord to_record(const Track& track);

// Schema-checked parsers. Failures throw ErrorCode::kSchemaViolation located
// by JSON pointer.
AnnotationFile parse_annotations(std::string_view text);
PredictionFile parse_predictions(std::string_view text);
TrackFile parse_tracks(std::string_view text);

Json to_json(const AnnotationFile& file);
Json to_json(const PredictionFile& file);
Json to_json(const TrackFile& file);
Json to_json(const SplitReport& report);
Json to_json(const ClipMetrics& clip);
Json to_json(const RocCurve& curve);

AnnotationFile load_annotations(const std::filesystem::path& path);
PredictionFile load_predictions(const std::filesystem::path& path);
TrackFile load_tracks(const std::filesystem::path& path);
void write_annotations(const std::filesystem::path& path, const AnnotationFile& file);
void write_predictions(const std::filesystem::path& path, const PredictionFile& file);
void write_tracks(const std::filesystem::path& path, const TrackFile& file);

// [x1, y1, x2, y2] or null.
Json box_to_json(const BBox2D& box);
BBox2D box_from_json(const Json& value, const std::string& ptr, bool allow_null);

std::string_view to_string(Uniqueness u);
std::string_view to_string(Movement m);
std::string_view to_string(TrackStatus s);

}  // namespace vrec
