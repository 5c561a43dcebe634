#include "vrec/colmap_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "vrec/errors.hpp"

namespace vrec {
namespace {

constexpr double kQuaternionTolerance = 1e-3;

std::string line_location(std::string_view file, std::size_t line) {
  return std::string(file) + ":" + std::to_string(line);
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view token, const std::string& where) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::kMalformedLine,
                "expected a number, got '" + std::string(token) + "'", where);
  }
  return value;
}

std::int64_t to_int(std::string_view token, const std::string& where) {
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw Error(ErrorCode::kMalformedLine,
                "expected an integer, got '" + std::string(token) + "'", where);
  }
  return value;
}

int to_id(std::string_view token, const std::string& where) {
  const std::int64_t v = to_int(token, where);
  if (v < 0 || v > std::numeric_limits<int>::max()) {
    throw Error(ErrorCode::kMalformedLine, "identifier out of range", where);
  }
  return static_cast<int>(v);
}

// Visits lines with 1-based numbers.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = text.find('\n', pos);
    const std::string_view line =
        text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    ++line_no;
    if (end == std::string_view::npos) {
      if (!line.empty()) fn(line, line_no);
      break;
    }
    fn(line, line_no);
    pos = end + 1;
  }
}

bool is_data_line(std::string_view line) {
  const std::string_view t = trim(line);
  return !t.empty() && t.front() != '#';
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open file", path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write file", path.string());
  out << text;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw Error(ErrorCode::kInvalidArgument, "cannot format number");
  return std::string(buf, ptr);
}

CameraMap parse_cameras(std::string_view text) {
  CameraMap cameras;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    if (!is_data_line(line)) return;
    const std::string where = line_location("cameras.txt", line_no);
    const auto tok = split_ws(line);
    if (tok.size() < 4) {
      throw Error(ErrorCode::kMalformedLine, "expected CAMERA_ID MODEL WIDTH HEIGHT PARAMS", where);
    }
    const int id = to_id(tok[0], where);
    if (tok[1] != "SIMPLE_RADIAL") {
      throw Error(ErrorCode::kUnsupportedModel,
                  "camera model " + std::string(tok[1]) + " is not supported", where);
    }
    if (tok.size() != 8) {
      throw Error(ErrorCode::kMalformedLine, "SIMPLE_RADIAL takes 4 parameters (f cx cy k)",
                  where);
    }
    CameraIntrinsics cam;
    const std::int64_t width = to_int(tok[2], where);
    const std::int64_t height = to_int(tok[3], where);
    if (width <= 0 || height <= 0 || width > std::numeric_limits<int>::max() ||
        height > std::numeric_limits<int>::max()) {
      throw Error(ErrorCode::kMalformedLine, "image size out of range", where);
    }
    cam.width = static_cast<int>(width);
    cam.height = static_cast<int>(height);
    cam.f = to_double(tok[4], where);
    cam.cx = to_double(tok[5], where);
    cam.cy = to_double(tok[6], where);
    cam.k = to_double(tok[7], where);
    try {
      cam.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedLine, e.what(), where);
    }
    if (!cameras.emplace(id, cam).second) {
      throw Error(ErrorCode::kMalformedLine, "duplicate camera id " + std::to_string(id), where);
    }
  });
  return cameras;
}

ImageMap parse_images(std::string_view text) {
  ImageMap images;
  std::optional<ColmapImage> pending;
  std::size_t pending_line = 0;

  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const std::string where = line_location("images.txt", line_no);
    if (pending) {
      // POINTS2D line: (X, Y, POINT3D_ID) triples, possibly empty.
      const auto tok = split_ws(line);
      if (tok.size() % 3 != 0) {
        throw Error(ErrorCode::kMalformedLine, "POINTS2D must hold (X Y POINT3D_ID) triples",
                    where);
      }
      for (std::size_t i = 0; i < tok.size(); i += 3) {
        to_double(tok[i], where);
        to_double(tok[i + 1], where);
        to_int(tok[i + 2], where);
      }
      const int id = pending->image_id;
      if (!images.emplace(id, std::move(*pending)).second) {
        throw Error(ErrorCode::kMalformedLine, "duplicate image id " + std::to_string(id),
                    line_location("images.txt", pending_line));
      }
      pending.reset();
      return;
    }
    if (!is_data_line(line)) return;

    const std::string_view body = trim(line);
    const auto tok = split_ws(body);
    if (tok.size() < 10) {
      throw Error(ErrorCode::kMalformedLine,
                  "expected IMAGE_ID QW QX QY QZ TX TY TZ CAMERA_ID NAME", where);
    }
    ColmapImage img;
    img.image_id = to_id(tok[0], where);
    const double qw = to_double(tok[1], where);
    const double qx = to_double(tok[2], where);
    const double qy = to_double(tok[3], where);
    const double qz = to_double(tok[4], where);
    img.pose.rotation = Eigen::Quaterniond(qw, qx, qy, qz);
    const double norm = img.pose.rotation.norm();
    if (!(std::abs(norm - 1.0) < kQuaternionTolerance)) {
      throw Error(ErrorCode::kMalformedPose,
                  "quaternion norm " + format_double(norm) + " is not close to 1", where);
    }
    if (std::abs(norm - 1.0) > 1e-12) img.pose.rotation.normalize();
    img.pose.translation = Vec3(to_double(tok[5], where), to_double(tok[6], where),
                                to_double(tok[7], where));
    img.camera_id = to_id(tok[8], where);
    // NAME is the rest of the line and may contain spaces.
    const std::size_t name_start = static_cast<std::size_t>(tok[9].data() - body.data());
    img.name = std::string(body.substr(name_start));
    pending = std::move(img);
    pending_line = line_no;
  });

  if (pending) {
    throw Error(ErrorCode::kMalformedLine, "image line without a POINTS2D line",
                line_location("images.txt", pending_line));
  }
  return images;
}

std::string write_cameras(const CameraMap& cameras) {
  std::string out;
  out += "# Camera list with one line of data per camera:\n";
  out += "#   CAMERA_ID, MODEL, WIDTH, HEIGHT, PARAMS[]\n";
  out += "# Number of cameras: " + std::to_string(cameras.size()) + "\n";
  for (const auto& [id, cam] : cameras) {
    out += std::to_string(id) + " SIMPLE_RADIAL " + std::to_string(cam.width) + " " +
           std::to_string(cam.height) + " " + format_double(cam.f) + " " +
           format_double(cam.cx) + " " + format_double(cam.cy) + " " +
           format_double(cam.k) + "\n";
  }
  return out;
}

std::string write_images(const ImageMap& images) {
  std::string out;
  out += "# Image list with two lines of data per image:\n";
  out += "#   IMAGE_ID, QW, QX, QY, QZ, TX, TY, TZ, CAMERA_ID, NAME\n";
  out += "#   POINTS2D[] as (X, Y, POINT3D_ID)\n";
  out += "# Number of images: " + std::to_string(images.size()) +
         ", mean observations per image: 0\n";
  for (const auto& [id, img] : images) {
    const Eigen::Quaterniond& q = img.pose.rotation;
    const Vec3& t = img.pose.translation;
    out += std::to_string(id) + " " + format_double(q.w()) + " " + format_double(q.x()) +
           " " + format_double(q.y()) + " " + format_double(q.z()) + " " +
           format_double(t.x()) + " " + format_double(t.y()) + " " + format_double(t.z()) +
           " " + std::to_string(img.camera_id) + " " + img.name + "\n\n";
  }
  return out;
}

void ColmapReconstruction::validate() const {
  for (const auto& [id, img] : images) {
    if (!cameras.contains(img.camera_id)) {
      throw Error(ErrorCode::kMalformedLine,
                  "image " + std::to_string(id) + " references missing camera " +
                      std::to_string(img.camera_id),
                  "images.txt");
    }
  }
}

ColmapReconstruction read_reconstruction(const std::filesystem::path& dir) {
  ColmapReconstruction rec;
  rec.cameras = parse_cameras(read_file(dir / "cameras.txt"));
  rec.images = parse_images(read_file(dir / "images.txt"));
  rec.validate();
  return rec;
}

void write_reconstruction(const std::filesystem::path& dir,
                          const ColmapReconstruction& reconstruction) {
  std::filesystem::create_directories(dir);
  write_file(dir / "cameras.txt", write_cameras(reconstruction.cameras));
  write_file(dir / "images.txt", write_images(reconstruction.images));
}

std::optional<std::int64_t> frame_index_from_name(std::string_view name) {
  const std::size_t slash = name.find_last_of("/\\");
  if (slash != std::string_view::npos) name = name.substr(slash + 1);
  const std::size_t dot = name.find_last_of('.');
  if (dot != std::string_view::npos) name = name.substr(0, dot);
  std::size_t start = name.size();
  while (start > 0 && name[start - 1] >= '0' && name[start - 1] <= '9') --start;
  if (start == name.size()) return std::nullopt;
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(name.data() + start, name.data() + name.size(), value);
  if (ec != std::errc()) return std::nullopt;
  return value;
}

std::vector<CalibratedFrame> calibrated_frames(
    const ColmapReconstruction& reconstruction,
    std::span<const std::int64_t> frame_indices,
    const std::map<std::string, std::int64_t>* name_to_frame) {
  std::map<std::int64_t, const ColmapImage*> by_frame;
  for (const auto& [id, img] : reconstruction.images) {
    std::optional<std::int64_t> frame;
    if (name_to_frame) {
      if (auto it = name_to_frame->find(img.name); it != name_to_frame->end()) {
        frame = it->second;
      }
    } else {
      frame = frame_index_from_name(img.name);
    }
    if (!frame) continue;
    if (!by_frame.emplace(*frame, &img).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "two images map to frame " + std::to_string(*frame));
    }
  }

  std::vector<CalibratedFrame> frames;
  frames.reserve(frame_indices.size());
  for (const std::int64_t index : frame_indices) {
    CalibratedFrame f;
    f.frame_index = index;
    if (auto it = by_frame.find(index); it != by_frame.end()) {
      f.camera_id = it->second->camera_id;
      f.pose = it->second->pose;
    }
    frames.push_back(f);
  }
  return frames;
}

}  // namespace vrec
