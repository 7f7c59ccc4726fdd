#include <gtest/gtest.h>

#include <Eigen/LU>
#include <random>

#include "reloc/error.hpp"
#include "reloc/evaluation.hpp"
#include "test_support.hpp"

namespace reloc {
namespace {

Trajectory random_trajectory(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Trajectory t;
  for (int k = 0; k < n; ++k) t.push_back({0.1 * k, test::random_pose(rng, 3.0)});
  return t;
}

Trajectory transformed(const Trajectory& t, const Pose& g) {
  Trajectory out = t;
  for (auto& s : out) s.pose = g * s.pose;
  return out;
}

TEST(Ate, IdenticalTrajectoriesScoreZero) {
  const auto t = random_trajectory(10, 1);
  const auto r = evaluate_ate(t, t);
  EXPECT_LT(r.rmse, 1e-12);
  EXPECT_LT(r.max_err, 1e-12);
  EXPECT_EQ(r.errors.size(), 10u);
}

TEST(Ate, WorkedOffsetWithoutAlignment) {
  Trajectory gt, est;
  for (int k = 0; k < 4; ++k) {
    gt.push_back({k * 1.0, Pose(Mat3::Identity(), Vec3(k, 0, 0))});
    est.push_back({k * 1.0, Pose(Mat3::Identity(), Vec3(k, k % 2 ? 2.0 : 0.0, 0))});
  }
  const auto r = evaluate_ate(est, gt, false);
  EXPECT_NEAR(r.rmse, std::sqrt(2.0), 1e-15);  // errors 0, 2, 0, 2
  EXPECT_EQ(r.max_err, 2.0);
  EXPECT_NEAR(r.sigma_rmse, 1.0 / 3.0, 1e-15);  // stdev 1, span 3
}

TEST(Ate, RigidMotionOfEstimateIsRemoved) {
  std::mt19937_64 rng(2);
  for (int k = 0; k < 20; ++k) {
    const auto gt = random_trajectory(15, 10 + k);
    const Pose g = test::random_pose(rng, 5.0);
    EXPECT_LT(evaluate_ate(transformed(gt, g), gt).rmse, 1e-9);
  }
}

TEST(Ate, InvariantToCommonRigidMotion) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 10; ++k) {
    const auto gt = random_trajectory(12, 30 + k);
    const auto est = random_trajectory(12, 60 + k);
    const Pose g = test::random_pose(rng, 5.0);
    const auto a = evaluate_ate(est, gt);
    const auto b = evaluate_ate(transformed(est, g), transformed(gt, g));
    EXPECT_NEAR(a.rmse, b.rmse, 1e-9);
    EXPECT_NEAR(a.sigma_rmse, b.sigma_rmse, 1e-9 + 1e-9 * a.sigma_rmse * 10);
  }
}

TEST(Ate, RmseSquaredTimesCountIsSumOfSquares) {
  const auto gt = random_trajectory(17, 4);
  const auto est = random_trajectory(17, 5);
  const auto r = evaluate_ate(est, gt);
  double sum = 0.0;
  for (double e : r.errors) sum += e * e;
  EXPECT_NEAR(r.rmse * r.rmse * 17.0, sum, 1e-10 * sum);
}

TEST(Ate, AlignmentIsOptimal) {
  // Any perturbation of the optimal transform can only raise the error.
  const auto gt = random_trajectory(9, 6);
  const auto est = random_trajectory(9, 7);
  std::vector<Vec3> a, b;
  for (std::size_t k = 0; k < gt.size(); ++k) {
    a.push_back(est[k].pose.translation);
    b.push_back(gt[k].pose.translation);
  }
  const Pose t = align_rigid(a, b);
  EXPECT_NEAR(t.rotation.determinant(), 1.0, 1e-12);
  auto cost = [&](const Pose& p) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (p.apply(a[k]) - b[k]).squaredNorm();
    return s;
  };
  std::mt19937_64 rng(8);
  for (int k = 0; k < 50; ++k) {
    EXPECT_GE(cost(se3_exp(test::random_twist(rng, 0.05, 0.05)) * t), cost(t) - 1e-9);
  }
}

TEST(Ate, Errors) {
  const auto a = random_trajectory(3, 1);
  auto b = random_trajectory(4, 2);
  try {
    (void)evaluate_ate(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
  }
  b.pop_back();
  b[1].timestamp += 1e-3;
  try {
    (void)evaluate_ate(a, b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TimestampMismatch);
  }
}

TEST(Ate, ReportFile) {
  test::TempDir dir;
  AteReport r;
  r.rmse = 0.125;
  r.sigma_rmse = 0.5;
  r.max_err = 2.0;
  r.errors = {1.0, 2.0};
  write_ate_report(dir / "ate.txt", r);
  const auto text = test::slurp(dir / "ate.txt");
  EXPECT_EQ(text.rfind("#", 0), 0u);
  EXPECT_NE(text.find("frames 2\n"), std::string::npos);
  EXPECT_NE(text.find("rmse 0.125\n"), std::string::npos);
  EXPECT_NE(text.find("max_err 2\n"), std::string::npos);
}

TEST(Heatmap, ElementwiseAbsoluteError) {
  SimilarityMatrix a(2), b(2);
  a.values = {1.0, 0.25, 0.5, 1.0};
  b.values = {1.0, 0.75, 0.375, 0.5};
  const auto h = heatmap_error(a, b);
  EXPECT_EQ(h.error.values, (std::vector<double>{0.0, 0.5, 0.125, 0.5}));
  EXPECT_EQ(h.max_abs_error, 0.5);
  EXPECT_THROW((void)heatmap_error(a, SimilarityMatrix(3)), Error);
}

}  // namespace
}  // namespace reloc
