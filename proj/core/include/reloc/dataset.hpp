#pragma once

#include <filesystem>
#include <vector>

#include "reloc/geometry.hpp"
#include "reloc/keyframe.hpp"
#include "reloc/scene.hpp"
#include "reloc/trajectory_io.hpp"

namespace reloc {

/// Keyframes with their ground-truth trajectory. On disk:
///
///   poses.txt          TUM trajectory, one line per keyframe
///   intrinsics.txt     `fx fy cx cy width height`
///   depth/%06d.pgm     16-bit big-endian PGM, millimeters, 0 = invalid
///   rgb/%06d.ppm       binary PPM
///   features.txt       `id scale count u0 v0 u1 v1 ...` (optional)
///   loops.txt          `id loop` (optional)
///   odometry.txt       drifting front-end trajectory, TUM (optional)
///
/// Patches are not stored; they are re-cropped from the RGB image on load.
struct Dataset {
  CameraIntrinsics intrinsics;
  std::vector<Keyframe> keyframes;
  Trajectory poses;
  std::vector<int> loop_of;
  Trajectory odometry;

  [[nodiscard]] std::size_t size() const { return keyframes.size(); }
  [[nodiscard]] std::vector<Pose> ground_truth() const { return poses_of(poses); }
  /// Keyframe indices belonging to `loop`, in order.
  [[nodiscard]] std::vector<int> loop_members(int loop) const;
  [[nodiscard]] int loop_count() const;
};

/// Renders every keyframe of the scene (in parallel; output is independent of
/// the worker count).
[[nodiscard]] Dataset build_dataset(const SyntheticScene& scene, int threads = 1);

void save_dataset(const std::filesystem::path& dir, const Dataset& dataset);

/// Throws ParseError (file and line), MissingDepth, IntrinsicsMismatch, Io.
[[nodiscard]] Dataset load_dataset(const std::filesystem::path& dir);

[[nodiscard]] CameraIntrinsics read_intrinsics(const std::filesystem::path& path);
void write_intrinsics(const std::filesystem::path& path, const CameraIntrinsics& k);

}  // namespace reloc
