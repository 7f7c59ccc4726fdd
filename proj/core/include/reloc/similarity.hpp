#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "reloc/geometry.hpp"
#include "reloc/image.hpp"
#include "reloc/keyframe.hpp"

namespace reloc {

/// Projected depth may exceed the target z-buffer by this much (meters)
/// before a pixel counts as hidden.
inline constexpr double kOcclusionEpsilon = 0.01;

/// Row-major n x n matrix of pairwise scores in [0, 1].
struct SimilarityMatrix {
  int n = 0;
  std::vector<double> values;

  SimilarityMatrix() = default;
  explicit SimilarityMatrix(int size)
      : n(size), values(static_cast<std::size_t>(size) * size, 0.0) {}

  [[nodiscard]] double at(int i, int j) const {
    return values[static_cast<std::size_t>(i) * n + j];
  }
  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * n + j]; }
  /// max |s(i,j) - s(j,i)|; reported, never enforced.
  [[nodiscard]] double max_asymmetry() const;
  bool operator==(const SimilarityMatrix&) const = default;
};

struct IouOptions {
  bool occlusion = true;
  double occlusion_eps = kOcclusionEpsilon;
  int threads = 1;
};

/// Per-pixel minimum depth of the points landing in each pixel; 0 where no
/// point lands. Points outside the resolution are ignored.
[[nodiscard]] DepthMap zbuffer_render(std::span<const PixelProjection> points, int width,
                                      int height);

/// The target's own surface as seen from the target camera.
[[nodiscard]] DepthMap target_zbuffer(const DepthMap& target_depth, const CameraIntrinsics& k);

/// Number of source pixels (sampled at pixel centers) whose backprojected
/// point lands inside the target image and, with occlusion on, is not hidden
/// behind the target z-buffer.
[[nodiscard]] long count_reprojected_pixels(const DepthMap& source, const Pose& pose_source,
                                            const Pose& pose_target, const CameraIntrinsics& k,
                                            const DepthMap* target_zbuf, double occlusion_eps);

/// Reprojection IoU: counted pixels / (width * height). Poses are camera-to-world.
/// Throws ResolutionMismatch if either depth map disagrees with the intrinsics.
[[nodiscard]] double reprojection_iou(const DepthMap& source, const DepthMap& target,
                                      const Pose& pose_source, const Pose& pose_target,
                                      const CameraIntrinsics& k, bool occlusion,
                                      double occlusion_eps = kOcclusionEpsilon);
[[nodiscard]] double reprojection_iou(const Keyframe& source, const Keyframe& target,
                                      const Pose& pose_source, const Pose& pose_target,
                                      const CameraIntrinsics& k, bool occlusion);

/// values[i][j] = reprojection_iou(i -> j) over all n^2 ordered pairs.
[[nodiscard]] SimilarityMatrix build_similarity_matrix(std::span<const DepthMap> depths,
                                                       std::span<const Pose> poses,
                                                       const CameraIntrinsics& k,
                                                       const IouOptions& options = {});
[[nodiscard]] SimilarityMatrix build_similarity_matrix(std::span<const Keyframe> keyframes,
                                                       std::span<const Pose> poses,
                                                       const CameraIntrinsics& k,
                                                       const IouOptions& options = {});

/// CSV, row-major, 9 significant digits.
void write_similarity_csv(const std::filesystem::path& path, const SimilarityMatrix& m);
[[nodiscard]] SimilarityMatrix read_similarity_csv(const std::filesystem::path& path);
/// 8-bit heatmap with value round(255 * s), clamped to [0, 255].
void write_similarity_pgm(const std::filesystem::path& path, const SimilarityMatrix& m);

}  // namespace reloc
