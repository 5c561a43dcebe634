#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vrec/camera.hpp"
#include "vrec/triangulation.hpp"

namespace vrec {

struct ColmapImage {
  int image_id = 0;
  CameraPose pose;
  int camera_id = 0;
  std::string name;
};

using ImageMap = std::map<int, ColmapImage>;

struct ColmapReconstruction {
  CameraMap cameras;
  ImageMap images;

  // Throws ErrorCode::kMalformedLine when an image references a missing
  // camera.
  void validate() const;
};

// COLMAP cameras.txt: "CAMERA_ID MODEL WIDTH HEIGHT PARAMS...", '#' lines
// are comments. Only SIMPLE_RADIAL (f, cx, cy, k) is accepted.
CameraMap parse_cameras(std::string_view text);

// COLMAP images.txt: "IMAGE_ID QW QX QY QZ TX TY TZ CAMERA_ID NAME" followed
// by a POINTS2D line that is checked and discarded. Quaternions within 1e-3
// of unit norm are renormalized; others are rejected.
ImageMap parse_images(std::string_view text);

std::string write_cameras(const CameraMap& cameras);
std::string write_images(const ImageMap& images);

ColmapReconstruction read_reconstruction(const std::filesystem::path& dir);
void write_reconstruction(const std::filesystem::path& dir,
                          const ColmapReconstruction& reconstruction);

// Trailing integer of the file stem: "frame_000012.jpg" -> 12.
std::optional<std::int64_t> frame_index_from_name(std::string_view name);

// One CalibratedFrame per requested index. Images are matched by name stem,
// or through `name_to_frame` when given. Unmatched indices come out
// unregistered.
std::vector<CalibratedFrame> calibrated_frames(
    const ColmapReconstruction& reconstruction,
    std::span<const std::int64_t> frame_indices,
    const std::map<std::string, std::int64_t>* name_to_frame = nullptr);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace vrec
