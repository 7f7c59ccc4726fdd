#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "reloc/error.hpp"
#include "reloc/g2o_io.hpp"
#include "test_support.hpp"

namespace reloc {
namespace {

PoseGraphProblem random_problem(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PoseGraphProblem p;
  for (int k = 0; k < 6; ++k) p.poses.push_back(test::random_pose(rng));
  p.edges = odometry_edges(p.poses);
  p.edges.push_back({5, 1, test::random_pose(rng), 0.375});
  p.anchor = 2;
  return p;
}

TEST(G2o, RoundTrip) {
  test::TempDir dir;
  const auto p = random_problem(1);
  write_g2o(dir / "p.g2o", p);
  const auto back = read_g2o(dir / "p.g2o");
  ASSERT_EQ(back.poses.size(), p.poses.size());
  ASSERT_EQ(back.edges.size(), p.edges.size());
  EXPECT_EQ(back.anchor, 2);
  for (std::size_t k = 0; k < p.poses.size(); ++k) {
    EXPECT_LT((back.poses[k].matrix() - p.poses[k].matrix()).cwiseAbs().maxCoeff(), 1e-12);
  }
  for (std::size_t k = 0; k < p.edges.size(); ++k) {
    EXPECT_EQ(back.edges[k].i, p.edges[k].i);
    EXPECT_EQ(back.edges[k].j, p.edges[k].j);
    EXPECT_EQ(back.edges[k].info_scale, p.edges[k].info_scale);
    EXPECT_LT((back.edges[k].measured.matrix() - p.edges[k].measured.matrix()).cwiseAbs().maxCoeff(),
              1e-12);
  }
  EXPECT_NEAR(total_cost(back.poses, back.edges), total_cost(p.poses, p.edges), 1e-9);
}

TEST(G2o, StoresInverseMeasurement) {
  // g2o's SE3 edge error is log(Z^-1 X_i^-1 X_j): the file carries X_i^-1 X_j.
  const Pose xi;
  const Pose xj(Mat3::Identity(), Vec3(2.0, 0.0, 0.0));
  PoseGraphProblem p{{xi, xj}, {{0, 1, relative_measurement(xi, xj), 4.0}}, 0};
  const std::string text = format_g2o(p);
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("EDGE_SE3:QUAT", 0) != 0) continue;
    std::istringstream f(line);
    std::string tag;
    int i, j;
    double tx, ty, tz, qx, qy, qz, qw, i00;
    f >> tag >> i >> j >> tx >> ty >> tz >> qx >> qy >> qz >> qw >> i00;
    EXPECT_EQ(tx, 2.0);
    EXPECT_EQ(ty, 0.0);
    EXPECT_EQ(qw, 1.0);
    EXPECT_EQ(i00, 4.0);
    int entries = 1;
    double x;
    while (f >> x) ++entries;
    EXPECT_EQ(entries, 21);
  }
  EXPECT_NE(text.find("FIX 0"), std::string::npos);
}

TEST(G2o, ParseErrors) {
  const std::string v0 = "VERTEX_SE3:QUAT 0 0 0 0 0 0 0 1\n";
  const std::string v1 = "VERTEX_SE3:QUAT 1 1 0 0 0 0 0 1\n";
  std::string iso = "EDGE_SE3:QUAT 0 1 1 0 0 0 0 0 1";
  for (int r = 0; r < 6; ++r)
    for (int c = r; c < 6; ++c) iso += r == c ? " 1" : " 0";
  EXPECT_NO_THROW((void)parse_g2o(v0 + v1 + iso + "\n", "ok"));

  std::string aniso = "EDGE_SE3:QUAT 0 1 1 0 0 0 0 0 1";
  for (int r = 0; r < 6; ++r)
    for (int c = r; c < 6; ++c) aniso += r == c ? (r == 0 ? " 2" : " 1") : " 0";
  EXPECT_THROW((void)parse_g2o(v0 + v1 + aniso + "\n", "a"), Error);
  EXPECT_THROW((void)parse_g2o(v0 + v1 + iso + " 9\n", "trail"), Error);
  EXPECT_THROW((void)parse_g2o(v0 + "VERTEX_SE3:QUAT 2 0 0 0 0 0 0 1\n" + iso + "\n", "gap"), Error);
  EXPECT_THROW((void)parse_g2o(v0 + v1 + "EDGE_SE2 0 1 0 0 0\n", "tag"), Error);
  try {
    (void)parse_g2o(v0 + "VERTEX_SE3:QUAT 1 1 0\n", "short.g2o");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("short.g2o:2"), std::string::npos);
  }
}

}  // namespace
}  // namespace reloc
