#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "reloc/geometry.hpp"

namespace reloc {

struct StampedPose {
  double timestamp = 0.0;
  Pose pose;  // camera-to-world
};

using Trajectory = std::vector<StampedPose>;

/// TUM trajectory text: `timestamp tx ty tz qx qy qz qw` per line. Blank
/// lines and lines starting with '#' are skipped. Numbers are written in
/// shortest round-trip form so that write/read is lossless for poses that
/// are quaternion fixed points (see canonicalize_rotation).
[[nodiscard]] Trajectory read_tum(const std::filesystem::path& path);
void write_tum(const std::filesystem::path& path, const Trajectory& trajectory);

[[nodiscard]] Trajectory parse_tum(const std::string& text, const std::string& source_name);
[[nodiscard]] std::string format_tum(const Trajectory& trajectory);

/// Iterates R -> q -> R until the rotation reproduces itself bit-for-bit
/// through the quaternion conversion (at most a few rounds). A pose in this
/// form survives TUM serialization unchanged.
[[nodiscard]] Pose canonicalize_rotation(const Pose& pose);

[[nodiscard]] std::vector<Pose> poses_of(const Trajectory& trajectory);

}  // namespace reloc
