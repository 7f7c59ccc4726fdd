#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <span>
#include <vector>

#include "reloc/similarity.hpp"
#include "reloc/trajectory_io.hpp"

namespace reloc {

struct AteReport {
  double rmse = 0.0;        // meters
  double sigma_rmse = 0.0;  // stdev of per-frame errors / largest distance between ground-truth positions
  double max_err = 0.0;     // meters
  std::vector<double> errors;
};

/// Rigid transform (no scale) minimizing sum |T a_k - b_k|^2.
[[nodiscard]] Pose align_rigid(std::span<const Vec3> a, std::span<const Vec3> b);

/// Throws LengthMismatch, TimestampMismatch (more than 1e-6 s apart).
[[nodiscard]] AteReport evaluate_ate(const Trajectory& estimated, const Trajectory& ground_truth,
                                     bool align = true);

struct HeatmapError {
  SimilarityMatrix error;
  double max_abs_error = 0.0;
};

/// Elementwise |pred - truth|. Throws DimMismatch.
[[nodiscard]] HeatmapError heatmap_error(const SimilarityMatrix& pred, const SimilarityMatrix& truth);

/// Text report: `# header` lines describing the metric, then key value pairs.
void write_ate_report(const std::filesystem::path& path, const AteReport& report);

}  // namespace reloc
