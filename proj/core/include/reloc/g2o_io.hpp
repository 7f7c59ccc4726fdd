#pragma once

#include <filesystem>
#include <string>

#include "reloc/pose_graph.hpp"

namespace reloc {

/// g2o text: one `VERTEX_SE3:QUAT id tx ty tz qx qy qz qw` per pose, one
/// `EDGE_SE3:QUAT i j tx ty tz qx qy qz qw` plus the 21 upper-triangular
/// information entries per edge, and `FIX anchor`. The stored edge
/// transform is X_i^-1 X_j, the inverse of PoseEdge::measured, so files load
/// into g2o with the same residuals.
[[nodiscard]] std::string format_g2o(const PoseGraphProblem& problem);
[[nodiscard]] PoseGraphProblem parse_g2o(const std::string& text, const std::string& source_name);

void write_g2o(const std::filesystem::path& path, const PoseGraphProblem& problem);
[[nodiscard]] PoseGraphProblem read_g2o(const std::filesystem::path& path);

}  // namespace reloc
