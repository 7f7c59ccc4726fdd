#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "reloc/error.hpp"
#include "reloc/pose_graph.hpp"
#include "test_support.hpp"

namespace reloc {
namespace {

using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Adjoint for twists ordered (rho, phi).
Mat6 adjoint(const Pose& t) {
  Mat6 a = Mat6::Zero();
  a.topLeftCorner<3, 3>() = t.rotation;
  a.topRightCorner<3, 3>() = skew(t.translation) * t.rotation;
  a.bottomRightCorner<3, 3>() = t.rotation;
  return a;
}

std::vector<Pose> circle(int n, double radius) {
  std::vector<Pose> poses;
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * std::numbers::pi * k / n;
    poses.emplace_back(so3_exp(Vec3(0.0, 0.0, a)),
                       Vec3(radius * std::cos(a), radius * std::sin(a), 0.0));
  }
  return poses;
}

std::vector<Pose> noisy_chain(std::span<const Pose> truth, double sigma_t, double sigma_r,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Pose> out{truth.front()};
  for (std::size_t k = 1; k < truth.size(); ++k) {
    const Twist noise(sigma_t * Vec3(g(rng), g(rng), g(rng)), sigma_r * Vec3(g(rng), g(rng), g(rng)));
    out.push_back(out.back() * truth[k - 1].inverse() * truth[k] * se3_exp(noise));
  }
  return out;
}

double max_pose_diff(std::span<const Pose> a, std::span<const Pose> b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    worst = std::max(worst, (a[k].matrix() - b[k].matrix()).cwiseAbs().maxCoeff());
  }
  return worst;
}

TEST(Residual, ZeroForConsistentMeasurement) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 50; ++k) {
    const Pose a = test::random_pose(rng);
    const Pose b = test::random_pose(rng);
    EXPECT_LT(edge_residual(a, b, relative_measurement(a, b)).vector().norm(), 1e-12);
  }
}

TEST(Residual, WorkedTranslationExample) {
  // X_i at the origin, X_j one meter along x, measured says they coincide.
  const Pose xi;
  const Pose xj(Mat3::Identity(), Vec3(1.0, 0.0, 0.0));
  const auto r = edge_residual(xi, xj, Pose{});
  EXPECT_LT((r.vector() - (Vec6() << 1, 0, 0, 0, 0, 0).finished()).norm(), 1e-15);
  const PoseEdge e{0, 1, Pose{}, 2.0};
  const std::vector<Pose> poses{xi, xj};
  EXPECT_NEAR(edge_gap(poses, e), 1.0, 1e-15);
  const std::vector<PoseEdge> edges{e};
  EXPECT_NEAR(total_cost(poses, edges), 2.0, 1e-15);
  EXPECT_TRUE(relative_measurement(xi, xj).translation.isApprox(Vec3(-1.0, 0.0, 0.0)));
}

TEST(Jacobian, MatchesAdjointAtZeroResidual) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) {
    const Pose xi = test::random_pose(rng);
    const Pose xj = test::random_pose(rng);
    const Pose z = relative_measurement(xi, xj);
    const auto j = edge_jacobian(xi, xj, z);
    const Mat6 ad = adjoint(z * xi.inverse());
    EXPECT_LT((j.rightCols<6>() - ad).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((j.leftCols<6>() + ad).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Jacobian, MatchesFiniteDifferenceAwayFromZero) {
  std::mt19937_64 rng(3);
  const Pose xi = test::random_pose(rng);
  const Pose xj = test::random_pose(rng);
  const Pose z = relative_measurement(xi, xj) * se3_exp(test::random_twist(rng, 0.5, 0.5));
  const auto j = edge_jacobian(xi, xj, z);
  for (int c = 0; c < 12; ++c) {
    Vec6 d = Vec6::Zero();
    d[c % 6] = 1e-7;
    auto perturbed = [&](double s) {
      const Pose dp = se3_exp(Twist::from_vector(s * d));
      return c < 6 ? edge_residual(dp * xi, xj, z).vector() : edge_residual(xi, dp * xj, z).vector();
    };
    const Vec6 fd = (perturbed(1.0) - perturbed(-1.0)) / 2e-7;
    EXPECT_LT((j.col(c) - fd).norm(), 1e-5) << c;
  }
}

TEST(Optimize, ConsistentChainStaysPut) {
  std::mt19937_64 rng(4);
  std::vector<Pose> truth{Pose{}};
  for (int k = 1; k < 5; ++k) truth.push_back(truth.back() * se3_exp(test::random_twist(rng, 0.3, 0.5)));
  PoseGraphProblem p{truth, odometry_edges(truth), 0};
  const auto r = optimize(p);
  EXPECT_LT(max_pose_diff(r.poses, truth), 1e-10);
  EXPECT_EQ(r.report.termination, Termination::ZeroCost);
}

TEST(Optimize, TwoPosesSolvedExactly) {
  std::mt19937_64 rng(5);
  const Pose a = test::random_pose(rng);
  const Pose b = test::random_pose(rng);
  const Pose target = a * se3_exp(test::random_twist(rng, 1.0, 1.0));
  PoseGraphProblem p{{a, b}, {{0, 1, relative_measurement(a, target), 1.0}}, 0};
  const auto r = optimize(p);
  EXPECT_LT(r.report.final_cost, 1e-16);
  EXPECT_LT((r.poses[1].matrix() - target.matrix()).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_TRUE(r.poses[0].matrix() == a.matrix());
}

class CircleProblem : public ::testing::Test {
 protected:
  void SetUp() override {
    truth_ = circle(20, 2.0);
    odo_ = noisy_chain(truth_, 0.03, 0.02, 11);
    problem_.poses = odo_;
    problem_.edges = odometry_edges(odo_);
    problem_.edges.push_back({19, 0, relative_measurement(truth_[19], truth_[0]), 1.0});
  }
  std::vector<Pose> truth_;
  std::vector<Pose> odo_;
  PoseGraphProblem problem_;
};

TEST_F(CircleProblem, LoopClosureShrinksGap) {
  const double before = edge_gap(problem_.poses, problem_.edges.back());
  ASSERT_GT(before, 0.05);
  const auto r = optimize(problem_);
  const double after = edge_gap(r.poses, problem_.edges.back());
  EXPECT_LT(after, 0.1 * before);
}

TEST_F(CircleProblem, CostIsMonotoneAndAnchorFixed) {
  problem_.anchor = 7;
  const auto r = optimize(problem_);
  ASSERT_GE(r.report.cost_history.size(), 2u);
  EXPECT_EQ(r.report.cost_history.front(), r.report.initial_cost);
  EXPECT_EQ(r.report.cost_history.back(), r.report.final_cost);
  EXPECT_EQ(static_cast<int>(r.report.cost_history.size()), r.report.iterations + 1);
  for (std::size_t k = 1; k < r.report.cost_history.size(); ++k) {
    EXPECT_LE(r.report.cost_history[k], r.report.cost_history[k - 1]);
  }
  EXPECT_TRUE(r.poses[7].rotation == odo_[7].rotation);
  EXPECT_TRUE(r.poses[7].translation == odo_[7].translation);
  EXPECT_NEAR(total_cost(r.poses, problem_.edges), r.report.final_cost, 1e-15);
}

TEST_F(CircleProblem, UniformInformationScaleDoesNotMoveOptimum) {
  auto scaled = problem_;
  for (auto& e : scaled.edges) e.info_scale *= 37.5;
  const auto a = optimize(problem_);
  const auto b = optimize(scaled);
  EXPECT_LT(max_pose_diff(a.poses, b.poses), 1e-8);
  EXPECT_NEAR(b.report.final_cost, 37.5 * a.report.final_cost, 1e-8 * b.report.final_cost + 1e-20);
}

TEST_F(CircleProblem, ZeroWeightEdgeIsInert) {
  auto extra = problem_;
  extra.edges.push_back({3, 12, se3_exp(Twist(Vec3(1, 2, 3), Vec3(0.3, 0.1, -0.2))), 0.0});
  const auto a = optimize(problem_);
  const auto b = optimize(extra);
  EXPECT_LT(max_pose_diff(a.poses, b.poses), 1e-12);
}

TEST_F(CircleProblem, IndependentOfThreadCount) {
  OptConfig four;
  four.threads = 4;
  const auto a = optimize(problem_);
  const auto b = optimize(problem_, four);
  EXPECT_EQ(max_pose_diff(a.poses, b.poses), 0.0);
}

TEST_F(CircleProblem, IterationCapIsReported) {
  OptConfig cfg;
  cfg.max_iters = 1;
  const auto r = optimize(problem_, cfg);
  EXPECT_EQ(r.report.termination, Termination::MaxIterations);
  EXPECT_EQ(r.report.iterations, 1);
}

TEST(Optimize, AllZeroInformationIsSingular) {
  const auto truth = circle(4, 1.0);
  PoseGraphProblem p{truth, odometry_edges(truth), 0};
  for (auto& e : p.edges) e.info_scale = 0.0;
  try {
    (void)optimize(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularNormalEquations);
  }
}

TEST(Problem, ValidateRejectsBadInput) {
  const auto truth = circle(4, 1.0);
  PoseGraphProblem p{truth, odometry_edges(truth), 0};
  EXPECT_NO_THROW(p.validate());
  p.anchor = 4;
  EXPECT_THROW(p.validate(), Error);
  p.anchor = 0;
  p.edges.push_back({0, 9, Pose{}, 1.0});
  EXPECT_THROW(p.validate(), Error);
  p.edges.back() = {0, 2, Pose{}, -1.0};
  EXPECT_THROW(p.validate(), Error);
}

TEST(Problem, BuildFromMatches) {
  const auto truth = circle(6, 1.0);
  std::mt19937_64 rng(8);
  std::vector<Pose> initial;
  for (const auto& t : truth) initial.push_back(t * se3_exp(test::random_twist(rng, 0.05, 0.05)));
  const auto odo = odometry_edges(initial);
  ASSERT_EQ(odo.size(), 5u);
  EXPECT_EQ(odo[2].i, 2);
  EXPECT_EQ(odo[2].j, 3);
  const std::vector<Match> m{{5, 0, 3.0}, {4, 1, 2.0}};
  const std::vector<double> theta{0.8, 0.25};
  const auto p = build_problem_from_matches(initial, odo, m, theta, truth);
  ASSERT_EQ(p.edges.size(), 7u);
  EXPECT_EQ(p.edges[5].i, 5);
  EXPECT_EQ(p.edges[5].j, 0);
  EXPECT_EQ(p.edges[6].info_scale, 0.25);
  EXPECT_LT(edge_residual(truth[4], truth[1], p.edges[6].measured).vector().norm(), 1e-12);

  const std::vector<double> short_theta{1.0};
  EXPECT_THROW((void)build_problem_from_matches(initial, odo, m, short_theta, truth), Error);
  const std::vector<Match> bad{{6, 0, 1.0}};
  try {
    (void)build_problem_from_matches(initial, odo, bad, short_theta, truth);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IndexOutOfRange);
  }
}

TEST(Termination, Names) {
  EXPECT_EQ(to_string(Termination::CostChange), "cost_change");
  EXPECT_EQ(to_string(Termination::DampingLimit), "damping_limit");
  EXPECT_EQ(to_string(Termination::ZeroCost), "zero_cost");
}

}  // namespace
}  // namespace reloc
