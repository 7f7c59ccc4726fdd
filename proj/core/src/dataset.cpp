#include "reloc/dataset.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include "reloc/error.hpp"
#include "reloc/features.hpp"
#include "reloc/image.hpp"
#include "reloc/parallel.hpp"

namespace reloc {

namespace fs = std::filesystem;

std::vector<int> Dataset::loop_members(int loop) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < keyframes.size(); ++i) {
    const int l = loop_of.empty() ? 0 : loop_of[i];
    if (l == loop) out.push_back(static_cast<int>(i));
  }
  return out;
}

int Dataset::loop_count() const {
  if (loop_of.empty()) return keyframes.empty() ? 0 : 1;
  return *std::max_element(loop_of.begin(), loop_of.end()) + 1;
}

Dataset build_dataset(const SyntheticScene& scene, int threads) {
  Dataset d;
  d.intrinsics = scene.intrinsics;
  const int n = static_cast<int>(scene.trajectory.size());
  d.keyframes.resize(n);
  parallel_for(n, threads, [&](std::size_t i) {
    d.keyframes[i] = make_keyframe(scene, static_cast<int>(i));
  });
  for (int i = 0; i < n; ++i) {
    d.poses.push_back({d.keyframes[i].timestamp, scene.trajectory[i]});
    d.odometry.push_back({d.keyframes[i].timestamp, scene.odometry[i]});
  }
  d.loop_of = scene.loop_of;
  return d;
}

namespace {

std::string frame_name(int id, const char* ext) { return fmt::format("{:06d}.{}", id, ext); }

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

bool is_blank_or_comment(const std::string& line) {
  const auto first = line.find_first_not_of(" \t\r");
  return first == std::string::npos || line[first] == '#';
}

}  // namespace

CameraIntrinsics read_intrinsics(const fs::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank_or_comment(line)) continue;
    std::istringstream f(line);
    CameraIntrinsics k;
    if (!(f >> k.fx >> k.fy >> k.cx >> k.cy >> k.width >> k.height)) {
      throw Error(ErrorCode::ParseError,
                  fmt::format("{}:{}: expected `fx fy cx cy width height`", path.string(), line_no));
    }
    try {
      k.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
    return k;
  }
  throw Error(ErrorCode::ParseError, path.string() + ": no intrinsics line");
}

void write_intrinsics(const fs::path& path, const CameraIntrinsics& k) {
  write_text(path, fmt::format("{} {} {} {} {} {}\n", k.fx, k.fy, k.cx, k.cy, k.width, k.height));
}

void save_dataset(const fs::path& dir, const Dataset& d) {
  std::error_code ec;
  fs::create_directories(dir / "depth", ec);
  fs::create_directories(dir / "rgb", ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());

  write_tum(dir / "poses.txt", d.poses);
  write_intrinsics(dir / "intrinsics.txt", d.intrinsics);
  std::string features;
  for (std::size_t i = 0; i < d.keyframes.size(); ++i) {
    const auto& kf = d.keyframes[i];
    const int id = static_cast<int>(i);
    write_depth_pgm(dir / "depth" / frame_name(id, "pgm"), kf.depth);
    write_ppm(dir / "rgb" / frame_name(id, "ppm"), kf.rgb);
    const int scale = kf.patches.empty() ? 0 : kf.patches.front().scale;
    features += fmt::format("{} {} {}", id, scale, kf.features.size());
    for (const auto& f : kf.features) features += fmt::format(" {} {}", f.u, f.v);
    features += '\n';
  }
  write_text(dir / "features.txt", features);
  if (!d.loop_of.empty()) {
    std::string loops;
    for (std::size_t i = 0; i < d.loop_of.size(); ++i) loops += fmt::format("{} {}\n", i, d.loop_of[i]);
    write_text(dir / "loops.txt", loops);
  }
  if (!d.odometry.empty()) write_tum(dir / "odometry.txt", d.odometry);
}

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::Io, "dataset directory not found: " + dir.string());
  Dataset d;
  d.poses = read_tum(dir / "poses.txt");
  d.intrinsics = read_intrinsics(dir / "intrinsics.txt");
  const int n = static_cast<int>(d.poses.size());

  for (int i = 0; i < n; ++i) {
    const auto depth_path = dir / "depth" / frame_name(i, "pgm");
    if (!fs::exists(depth_path)) {
      throw Error(ErrorCode::MissingDepth,
                  fmt::format("{} lists {} poses but {} is missing", (dir / "poses.txt").string(),
                              n, depth_path.string()));
    }
  }

  d.keyframes.resize(n);
  for (int i = 0; i < n; ++i) {
    auto& kf = d.keyframes[i];
    kf.id = i;
    kf.timestamp = d.poses[i].timestamp;
    const auto depth_path = dir / "depth" / frame_name(i, "pgm");
    const auto rgb_path = dir / "rgb" / frame_name(i, "ppm");
    kf.depth = read_depth_pgm(depth_path);
    kf.rgb = read_ppm(rgb_path);
    if (kf.depth.width != d.intrinsics.width || kf.depth.height != d.intrinsics.height ||
        kf.rgb.width != d.intrinsics.width || kf.rgb.height != d.intrinsics.height) {
      throw Error(ErrorCode::IntrinsicsMismatch,
                  fmt::format("keyframe {}: image size {}x{} / depth {}x{} disagrees with "
                              "intrinsics {}x{}",
                              i, kf.rgb.width, kf.rgb.height, kf.depth.width, kf.depth.height,
                              d.intrinsics.width, d.intrinsics.height));
    }
  }

  const auto features_path = dir / "features.txt";
  if (fs::exists(features_path)) {
    std::istringstream in(read_text(features_path));
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (is_blank_or_comment(line)) continue;
      std::istringstream f(line);
      int id = 0, scale = 0;
      std::size_t count = 0;
      if (!(f >> id >> scale >> count) || id < 0 || id >= n) {
        throw Error(ErrorCode::ParseError,
                    fmt::format("{}:{}: bad feature header", features_path.string(), line_no));
      }
      auto& kf = d.keyframes[id];
      kf.features.resize(count);
      for (auto& p : kf.features) {
        if (!(f >> p.u >> p.v)) {
          throw Error(ErrorCode::ParseError,
                      fmt::format("{}:{}: expected {} coordinate pairs", features_path.string(),
                                  line_no, count));
        }
      }
      if (scale > 0) {
        try {
          kf.patches = extract_patches(kf.rgb, kf.features, scale);
        } catch (const Error& e) {
          throw Error(ErrorCode::ParseError,
                      fmt::format("{}:{}: {}", features_path.string(), line_no, e.what()));
        }
      }
    }
  }

  const auto loops_path = dir / "loops.txt";
  if (fs::exists(loops_path)) {
    d.loop_of.assign(n, 0);
    std::istringstream in(read_text(loops_path));
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (is_blank_or_comment(line)) continue;
      std::istringstream f(line);
      int id = 0, loop = 0;
      if (!(f >> id >> loop) || id < 0 || id >= n || loop < 0) {
        throw Error(ErrorCode::ParseError,
                    fmt::format("{}:{}: expected `id loop`", loops_path.string(), line_no));
      }
      d.loop_of[id] = loop;
    }
  }

  const auto odometry_path = dir / "odometry.txt";
  if (fs::exists(odometry_path)) {
    d.odometry = read_tum(odometry_path);
    if (static_cast<int>(d.odometry.size()) != n) {
      throw Error(ErrorCode::ParseError,
                  fmt::format("{}: {} entries, expected {}", odometry_path.string(),
                              d.odometry.size(), n));
    }
  }
  return d;
}

}  // namespace reloc
