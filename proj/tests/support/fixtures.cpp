#include "fixtures.hpp"

#include <atomic>
#include <chrono>

namespace fixtures {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  path_ = fs::temp_directory_path() /
          ("vrec_" + tag + "_" + std::to_string(stamp) + "_" + std::to_string(counter++));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

fs::path source_dir() { return fs::path(VREC_TEST_SOURCE_DIR); }

vrec::BBox2D box(double x1, double y1, double x2, double y2) {
  return vrec::BBox2D::from_corners(x1, y1, x2, y2);
}

vrec::BBox2D random_int_box(std::mt19937_64& rng, int extent) {
  std::uniform_int_distribution<int> pick(0, extent);
  for (;;) {
    int x1 = pick(rng), x2 = pick(rng), y1 = pick(rng), y2 = pick(rng);
    if (x1 == x2 || y1 == y2) continue;
    if (x1 > x2) std::swap(x1, x2);
    if (y1 > y2) std::swap(y1, y2);
    return box(x1, y1, x2, y2);
  }
}

vrec::BBox2D random_box(std::mt19937_64& rng, double extent) {
  std::uniform_real_distribution<double> pick(0.0, extent);
  for (;;) {
    double x1 = pick(rng), x2 = pick(rng), y1 = pick(rng), y2 = pick(rng);
    if (x1 == x2 || y1 == y2) continue;
    if (x1 > x2) std::swap(x1, x2);
    if (y1 > y2) std::swap(y1, y2);
    return box(x1, y1, x2, y2);
  }
}

Crossing crossing() {
  Crossing c;
  for (int i = 0; i < 10; ++i) {
    const double ax = 20.0 + 15.0 * i;
    const double bx = 200.0 - 15.0 * i;
    c.a_boxes.push_back(box(ax, 100.0, ax + 40.0, 150.0));
    c.b_boxes.push_back(box(bx, 130.0, bx + 40.0, 180.0));
    const double a_score = i == 5 ? 0.3 : 0.95;
    const double b_score = i == 5 ? 0.5 : 0.4;
    c.stream[i] = {{i, c.a_boxes.back(), a_score}, {i, c.b_boxes.back(), b_score}};
  }
  return c;
}

vrec::AnnotationFile crossing_annotations() {
  const Crossing c = crossing();
  vrec::AnnotatedClip clip;
  clip.clip_id = "crossing";
  clip.expression = "the box moving right";
  for (int i = 0; i < 10; ++i) clip.frames.push_back({i, c.a_boxes[i]});
  return {{clip}};
}

vrec::PredictionFile crossing_predictions() {
  const Crossing c = crossing();
  vrec::PredictedClip clip;
  clip.clip_id = "crossing";
  for (const auto& [frame, dets] : c.stream) {
    vrec::PredictedFrame f{frame, {}};
    for (const vrec::Detection& d : dets) f.boxes.push_back({d.box, d.score});
    clip.frames.push_back(f);
  }
  return {{clip}};
}

vrec::ClipEvaluation make_clip(const std::string& id, const std::vector<vrec::BBox2D>& gt,
                               const std::vector<vrec::BBox2D>& pred) {
  vrec::ClipEvaluation clip;
  clip.clip_id = id;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    clip.frames.push_back({static_cast<std::int64_t>(i), gt[i], pred[i], std::nullopt});
  }
  return clip;
}

}  // namespace fixtures
