#pragma once

#include <span>
#include <string>
#include <vector>

#include "reloc/geometry.hpp"
#include "reloc/query.hpp"

namespace reloc {

/// Relative-pose constraint. `measured` maps frame i into frame j
/// (T_i^j = X_j^-1 X_i for camera-to-world poses X). Information = info_scale * I6.
struct PoseEdge {
  int i = 0;
  int j = 0;
  Pose measured;
  double info_scale = 1.0;
};

struct PoseGraphProblem {
  std::vector<Pose> poses;  // camera-to-world initial estimates
  std::vector<PoseEdge> edges;
  int anchor = 0;

  /// Throws IndexOutOfRange, InvalidArgument (no edges, negative or non-finite scale).
  void validate() const;
};

/// r = log(measured * X_i^-1 * X_j). Zero iff X_j^-1 X_i == measured.
/// Throws AngleNearPi.
[[nodiscard]] Twist edge_residual(const Pose& pose_i, const Pose& pose_j, const Pose& measured);

/// T_i^j implied by two camera-to-world poses.
[[nodiscard]] Pose relative_measurement(const Pose& pose_i, const Pose& pose_j);

/// Translation norm of an edge's residual under `poses`.
[[nodiscard]] double edge_gap(std::span<const Pose> poses, const PoseEdge& edge);

/// Sum over edges of info_scale * |r|^2.
[[nodiscard]] double total_cost(std::span<const Pose> poses, std::span<const PoseEdge> edges);

enum class Termination { CostChange, GradientNorm, ZeroCost, MaxIterations, DampingLimit };
[[nodiscard]] std::string to_string(Termination t);

struct OptConfig {
  int max_iters = 100;
  double initial_damping = 1e-4;
  double tol = 1e-12;
  int threads = 1;
};

struct OptReport {
  int iterations = 0;  // accepted steps
  double initial_cost = 0.0;
  double final_cost = 0.0;
  std::vector<double> cost_history;  // initial cost, then cost after each accepted step
  Termination termination = Termination::MaxIterations;
};

struct OptResult {
  std::vector<Pose> poses;
  OptReport report;
};

/// Levenberg-Marquardt with left-multiplicative twist updates exp(d) * X and
/// central-difference Jacobians. The anchor pose is never modified.
/// Throws SingularNormalEquations (every info_scale zero), NonFiniteCost.
[[nodiscard]] OptResult optimize(const PoseGraphProblem& problem, const OptConfig& config = {});

/// Numeric 6x12 Jacobian of edge_residual with respect to left twists on
/// pose_i (first six columns) and pose_j.
[[nodiscard]] Eigen::Matrix<double, 6, 12> edge_jacobian(const Pose& pose_i, const Pose& pose_j,
                                                         const Pose& measured, double eps = 1e-6);

/// Chain edges k -> k+1 whose measurements are the relative poses between
/// consecutive entries of `trajectory` (info_scale 1).
[[nodiscard]] std::vector<PoseEdge> odometry_edges(std::span<const Pose> trajectory);

/// Odometry chain plus one edge per match with the measurement taken from
/// `measurement_source` (ground truth or an external estimate) and
/// info_scale = theta[k]. Throws IndexOutOfRange, LengthMismatch.
[[nodiscard]] PoseGraphProblem build_problem_from_matches(std::span<const Pose> initial,
                                                          std::span<const PoseEdge> odometry,
                                                          std::span<const Match> matches,
                                                          std::span<const double> theta,
                                                          std::span<const Pose> measurement_source);

}  // namespace reloc
