#include "reloc/similarity.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "reloc/error.hpp"
#include "reloc/parallel.hpp"

namespace reloc {

double SimilarityMatrix::max_asymmetry() const {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) worst = std::max(worst, std::abs(at(i, j) - at(j, i)));
  }
  return worst;
}

DepthMap zbuffer_render(std::span<const PixelProjection> points, int width, int height) {
  DepthMap out(width, height);
  for (const auto& p : points) {
    if (!(p.u >= 0.0 && p.u < width && p.v >= 0.0 && p.v < height) || !(p.z > 0.0)) continue;
    const int c = p.col();
    const int r = p.row();
    if (c < 0 || c >= width || r < 0 || r >= height) continue;
    double& cell = out.at(c, r);
    if (cell == 0.0 || p.z < cell) cell = p.z;
  }
  return out;
}

namespace {

void check_resolution(const DepthMap& d, const CameraIntrinsics& k, const char* which) {
  if (d.width != k.width || d.height != k.height ||
      d.values.size() != static_cast<std::size_t>(k.pixel_count())) {
    throw Error(ErrorCode::ResolutionMismatch,
                fmt::format("{} depth is {}x{}, intrinsics expect {}x{}", which, d.width,
                            d.height, k.width, k.height));
  }
}

}  // namespace

DepthMap target_zbuffer(const DepthMap& target_depth, const CameraIntrinsics& k) {
  std::vector<PixelProjection> points;
  points.reserve(target_depth.values.size());
  for (int r = 0; r < target_depth.height; ++r) {
    for (int c = 0; c < target_depth.width; ++c) {
      const double z = target_depth.at(c, r);
      if (!(z > 0.0)) continue;
      if (auto px = project(k, backproject(k, c + 0.5, r + 0.5, z))) points.push_back(*px);
    }
  }
  return zbuffer_render(points, k.width, k.height);
}

long count_reprojected_pixels(const DepthMap& source, const Pose& pose_source,
                              const Pose& pose_target, const CameraIntrinsics& k,
                              const DepthMap* target_zbuf, double occlusion_eps) {
  const Pose world_to_target = pose_target.inverse();
  long count = 0;
  for (int r = 0; r < source.height; ++r) {
    for (int c = 0; c < source.width; ++c) {
      const double z = source.at(c, r);
      if (!(z > 0.0)) continue;
      const Vec3 world = pose_source.apply(backproject(k, c + 0.5, r + 0.5, z));
      const auto px = project(k, world_to_target.apply(world));
      if (!px) continue;
      if (target_zbuf != nullptr) {
        const double surface = target_zbuf->at(px->col(), px->row());
        if (surface > 0.0 && px->z > surface + occlusion_eps) continue;
      }
      ++count;
    }
  }
  return count;
}

double reprojection_iou(const DepthMap& source, const DepthMap& target, const Pose& pose_source,
                        const Pose& pose_target, const CameraIntrinsics& k, bool occlusion,
                        double occlusion_eps) {
  check_resolution(source, k, "source");
  check_resolution(target, k, "target");
  DepthMap zbuf;
  if (occlusion) zbuf = target_zbuffer(target, k);
  const long n = count_reprojected_pixels(source, pose_source, pose_target, k,
                                          occlusion ? &zbuf : nullptr, occlusion_eps);
  return static_cast<double>(n) / static_cast<double>(k.pixel_count());
}

double reprojection_iou(const Keyframe& source, const Keyframe& target, const Pose& pose_source,
                        const Pose& pose_target, const CameraIntrinsics& k, bool occlusion) {
  return reprojection_iou(source.depth, target.depth, pose_source, pose_target, k, occlusion);
}

SimilarityMatrix build_similarity_matrix(std::span<const DepthMap> depths,
                                         std::span<const Pose> poses, const CameraIntrinsics& k,
                                         const IouOptions& options) {
  if (depths.empty() || depths.size() != poses.size()) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("need n >= 1 keyframes with one pose each (got {} keyframes, {} poses)",
                            depths.size(), poses.size()));
  }
  const int n = static_cast<int>(depths.size());
  for (int i = 0; i < n; ++i) {
    try {
      check_resolution(depths[i], k, "keyframe");
    } catch (const Error& e) {
      throw Error(ErrorCode::ResolutionMismatch, fmt::format("keyframe {}: {}", i, e.what()));
    }
  }

  std::vector<DepthMap> zbufs;
  if (options.occlusion) {
    zbufs.resize(n);
    parallel_for(n, options.threads, [&](std::size_t j) { zbufs[j] = target_zbuffer(depths[j], k); });
  }

  SimilarityMatrix m(n);
  const double denom = static_cast<double>(k.pixel_count());
  parallel_for(static_cast<std::size_t>(n) * n, options.threads, [&](std::size_t idx) {
    const int i = static_cast<int>(idx / n);
    const int j = static_cast<int>(idx % n);
    const long count = count_reprojected_pixels(depths[i], poses[i], poses[j], k,
                                                options.occlusion ? &zbufs[j] : nullptr,
                                                options.occlusion_eps);
    m.values[idx] = static_cast<double>(count) / denom;
  });
  return m;
}

SimilarityMatrix build_similarity_matrix(std::span<const Keyframe> keyframes,
                                         std::span<const Pose> poses, const CameraIntrinsics& k,
                                         const IouOptions& options) {
  std::vector<DepthMap> depths;
  depths.reserve(keyframes.size());
  for (const auto& kf : keyframes) depths.push_back(kf.depth);
  return build_similarity_matrix(std::span<const DepthMap>(depths), poses, k, options);
}

void write_similarity_csv(const std::filesystem::path& path, const SimilarityMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (int i = 0; i < m.n; ++i) {
    for (int j = 0; j < m.n; ++j) {
      if (j > 0) out << ',';
      out << fmt::format("{:.9g}", m.at(i, j));
    }
    out << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

SimilarityMatrix read_similarity_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) {
          throw std::invalid_argument("trailing characters");
        }
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError,
                    fmt::format("{}:{}: bad number '{}'", path.string(), line_no, cell));
      }
    }
    rows.push_back(std::move(row));
  }
  SimilarityMatrix m(static_cast<int>(rows.size()));
  for (int i = 0; i < m.n; ++i) {
    if (static_cast<int>(rows[i].size()) != m.n) {
      throw Error(ErrorCode::ParseError,
                  fmt::format("{}: row {} has {} entries, expected {}", path.string(), i + 1,
                              rows[i].size(), m.n));
    }
    for (int j = 0; j < m.n; ++j) m.at(i, j) = rows[i][j];
  }
  return m;
}

void write_similarity_pgm(const std::filesystem::path& path, const SimilarityMatrix& m) {
  std::vector<std::uint8_t> px(m.values.size());
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = static_cast<std::uint8_t>(std::clamp(std::round(255.0 * m.values[i]), 0.0, 255.0));
  }
  write_pgm8(path, m.n, m.n, px);
}

}  // namespace reloc
