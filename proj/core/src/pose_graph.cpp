#include "reloc/pose_graph.hpp"

#include <fmt/format.h>

#include <Eigen/Cholesky>
#include <cmath>

#include "reloc/error.hpp"
#include "reloc/parallel.hpp"

namespace reloc {

namespace {

constexpr double kZeroCost = 1e-24;
constexpr double kMaxDamping = 1e16;
constexpr double kJitter = 1e-12;

using Jac = Eigen::Matrix<double, 6, 12>;

struct Linearized {
  Vec6 r;
  Jac j;
};

}  // namespace

void PoseGraphProblem::validate() const {
  const int n = static_cast<int>(poses.size());
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "pose graph has no poses");
  if (anchor < 0 || anchor >= n) {
    throw Error(ErrorCode::IndexOutOfRange, fmt::format("anchor {} outside [0, {})", anchor, n));
  }
  if (edges.empty()) throw Error(ErrorCode::InvalidArgument, "pose graph has no edges");
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    if (e.i < 0 || e.i >= n || e.j < 0 || e.j >= n) {
      throw Error(ErrorCode::IndexOutOfRange,
                  fmt::format("edge {} ({}, {}) references a missing pose", k, e.i, e.j));
    }
    if (!(e.info_scale >= 0.0) || !std::isfinite(e.info_scale)) {
      throw Error(ErrorCode::InvalidArgument,
                  fmt::format("edge {} has invalid info scale {}", k, e.info_scale));
    }
  }
}

Twist edge_residual(const Pose& pose_i, const Pose& pose_j, const Pose& measured) {
  return se3_log(measured * pose_i.inverse() * pose_j);
}

Pose relative_measurement(const Pose& pose_i, const Pose& pose_j) {
  return pose_j.inverse() * pose_i;
}

double edge_gap(std::span<const Pose> poses, const PoseEdge& edge) {
  return edge_residual(poses[edge.i], poses[edge.j], edge.measured).rho.norm();
}

double total_cost(std::span<const Pose> poses, std::span<const PoseEdge> edges) {
  double cost = 0.0;
  for (const auto& e : edges) {
    if (e.info_scale == 0.0) continue;
    cost += e.info_scale * edge_residual(poses[e.i], poses[e.j], e.measured).vector().squaredNorm();
  }
  return cost;
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::CostChange: return "cost_change";
    case Termination::GradientNorm: return "gradient_norm";
    case Termination::ZeroCost: return "zero_cost";
    case Termination::MaxIterations: return "max_iterations";
    case Termination::DampingLimit: return "damping_limit";
  }
  return "unknown";
}

Jac edge_jacobian(const Pose& pose_i, const Pose& pose_j, const Pose& measured, double eps) {
  Jac jac;
  for (int side = 0; side < 2; ++side) {
    for (int d = 0; d < 6; ++d) {
      Vec6 delta = Vec6::Zero();
      delta[d] = eps;
      const Pose plus = se3_exp(Twist::from_vector(delta));
      const Pose minus = se3_exp(Twist::from_vector(-delta));
      Vec6 rp, rm;
      if (side == 0) {
        rp = edge_residual(plus * pose_i, pose_j, measured).vector();
        rm = edge_residual(minus * pose_i, pose_j, measured).vector();
      } else {
        rp = edge_residual(pose_i, plus * pose_j, measured).vector();
        rm = edge_residual(pose_i, minus * pose_j, measured).vector();
      }
      jac.col(side * 6 + d) = (rp - rm) / (2.0 * eps);
    }
  }
  return jac;
}

OptResult optimize(const PoseGraphProblem& problem, const OptConfig& config) {
  problem.validate();
  bool any_weight = false;
  for (const auto& e : problem.edges) any_weight = any_weight || e.info_scale > 0.0;
  if (!any_weight) {
    throw Error(ErrorCode::SingularNormalEquations, "every edge has zero information");
  }

  const int n = static_cast<int>(problem.poses.size());
  std::vector<int> slot(n, -1);
  int free_count = 0;
  for (int k = 0; k < n; ++k)
    if (k != problem.anchor) slot[k] = free_count++;
  const Eigen::Index dim = 6 * static_cast<Eigen::Index>(free_count);

  OptResult result;
  result.poses = problem.poses;
  auto& report = result.report;
  double cost = total_cost(result.poses, problem.edges);
  if (!std::isfinite(cost)) throw Error(ErrorCode::NonFiniteCost, "initial cost is not finite");
  report.initial_cost = cost;
  report.cost_history.push_back(cost);
  report.final_cost = cost;
  if (free_count == 0) {
    report.termination = Termination::ZeroCost;
    return result;
  }

  const int threads = resolve_thread_count(config.threads);
  double lambda = config.initial_damping;
  std::vector<Linearized> lin(problem.edges.size());
  bool relinearize = true;
  Eigen::MatrixXd h(dim, dim);
  Eigen::VectorXd g(dim);
  report.termination = Termination::MaxIterations;

  for (int iter = 0; iter < config.max_iters; ++iter) {
    if (cost <= kZeroCost) {
      report.termination = Termination::ZeroCost;
      break;
    }
    if (relinearize) {
      parallel_for(problem.edges.size(), threads, [&](std::size_t k) {
        const auto& e = problem.edges[k];
        if (e.info_scale == 0.0) return;
        const Pose& xi = result.poses[e.i];
        const Pose& xj = result.poses[e.j];
        lin[k].r = edge_residual(xi, xj, e.measured).vector();
        lin[k].j = edge_jacobian(xi, xj, e.measured);
      });
      h.setZero();
      g.setZero();
      for (std::size_t k = 0; k < problem.edges.size(); ++k) {
        const auto& e = problem.edges[k];
        if (e.info_scale == 0.0) continue;
        const int si = slot[e.i];
        const int sj = slot[e.j];
        const int idx[2] = {si, sj};
        for (int a = 0; a < 2; ++a) {
          if (idx[a] < 0) continue;
          const auto ja = lin[k].j.middleCols<6>(6 * a);
          g.segment<6>(6 * idx[a]) += e.info_scale * ja.transpose() * lin[k].r;
          for (int b = 0; b < 2; ++b) {
            if (idx[b] < 0) continue;
            const auto jb = lin[k].j.middleCols<6>(6 * b);
            h.block<6, 6>(6 * idx[a], 6 * idx[b]) += e.info_scale * ja.transpose() * jb;
          }
        }
      }
      if (!h.allFinite() || !g.allFinite()) {
        throw Error(ErrorCode::NonFiniteCost, fmt::format("non-finite linearization at iteration {}", iter));
      }
      if (g.lpNorm<Eigen::Infinity>() < config.tol) {
        report.termination = Termination::GradientNorm;
        break;
      }
      relinearize = false;
    }

    Eigen::MatrixXd a = h;
    a.diagonal() += lambda * h.diagonal();
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
      a.diagonal().array() += kJitter;
      llt.compute(a);
      if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::SingularNormalEquations,
                    fmt::format("normal equations not positive definite at iteration {}", iter));
      }
    }
    const Eigen::VectorXd delta = llt.solve(-g);

    std::vector<Pose> candidate = result.poses;
    for (int k = 0; k < n; ++k) {
      if (slot[k] < 0) continue;
      candidate[k] = se3_exp(Twist::from_vector(delta.segment<6>(6 * slot[k]))) * candidate[k];
    }
    double new_cost = 0.0;
    try {
      new_cost = total_cost(candidate, problem.edges);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::AngleNearPi) throw;
      new_cost = std::numeric_limits<double>::infinity();
    }

    if (std::isfinite(new_cost) && new_cost < cost) {
      const double change = (cost - new_cost) / cost;
      result.poses = std::move(candidate);
      cost = new_cost;
      report.cost_history.push_back(cost);
      ++report.iterations;
      lambda = std::max(lambda / 10.0, 1e-12);
      relinearize = true;
      if (change < config.tol) {
        report.termination = Termination::CostChange;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > kMaxDamping) {
        report.termination = Termination::DampingLimit;
        break;
      }
    }
  }
  if (!std::isfinite(cost)) throw Error(ErrorCode::NonFiniteCost, "final cost is not finite");
  report.final_cost = cost;
  return result;
}

std::vector<PoseEdge> odometry_edges(std::span<const Pose> trajectory) {
  std::vector<PoseEdge> edges;
  for (std::size_t k = 0; k + 1 < trajectory.size(); ++k) {
    edges.push_back({static_cast<int>(k), static_cast<int>(k + 1),
                     relative_measurement(trajectory[k], trajectory[k + 1]), 1.0});
  }
  return edges;
}

PoseGraphProblem build_problem_from_matches(std::span<const Pose> initial,
                                            std::span<const PoseEdge> odometry,
                                            std::span<const Match> matches,
                                            std::span<const double> theta,
                                            std::span<const Pose> measurement_source) {
  if (theta.size() != matches.size()) {
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("{} matches but {} similarity weights", matches.size(), theta.size()));
  }
  if (measurement_source.size() != initial.size()) {
    throw Error(ErrorCode::LengthMismatch,
                fmt::format("{} initial poses but {} measurement poses", initial.size(),
                            measurement_source.size()));
  }
  PoseGraphProblem p;
  p.poses.assign(initial.begin(), initial.end());
  p.edges.assign(odometry.begin(), odometry.end());
  const int n = static_cast<int>(initial.size());
  for (std::size_t k = 0; k < matches.size(); ++k) {
    const auto& m = matches[k];
    if (m.query < 0 || m.query >= n || m.reference < 0 || m.reference >= n) {
      throw Error(ErrorCode::IndexOutOfRange,
                  fmt::format("match ({}, {}) outside [0, {})", m.query, m.reference, n));
    }
    p.edges.push_back({m.query, m.reference,
                       relative_measurement(measurement_source[m.query],
                                            measurement_source[m.reference]),
                       theta[k]});
  }
  p.validate();
  return p;
}

}  // namespace reloc
