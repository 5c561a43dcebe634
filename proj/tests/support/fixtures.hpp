#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "vrec/box.hpp"
#include "vrec/json_io.hpp"
#include "vrec/metrics.hpp"
#include "vrec/tracker.hpp"

namespace fixtures {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::filesystem::path source_dir();

vrec::BBox2D box(double x1, double y1, double x2, double y2);

// Present box with integer corners inside [0, extent]^2.
vrec::BBox2D random_int_box(std::mt19937_64& rng, int extent);
vrec::BBox2D random_box(std::mt19937_64& rng, double extent);

// Ten frames. Object A (the referred one, detection index 0) moves right,
// object B (index 1) moves left and passes below it. A scores 0.95 except on
// frame 5 where it drops to 0.3 and B, otherwise at 0.4, reaches 0.5.
struct Crossing {
  vrec::DetectionStream stream;
  std::vector<vrec::BBox2D> a_boxes, b_boxes;
};
Crossing crossing();

// The same scene as evaluation inputs: gt is A on every frame.
vrec::AnnotationFile crossing_annotations();
vrec::PredictionFile crossing_predictions();

// A clip of FrameRecords from parallel lists.
vrec::ClipEvaluation make_clip(const std::string& id, const std::vector<vrec::BBox2D>& gt,
                               const std::vector<vrec::BBox2D>& pred);

}  // namespace fixtures
