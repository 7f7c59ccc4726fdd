#include <gtest/gtest.h>

#include "reloc/error.hpp"
#include "reloc/scene.hpp"
#include "test_support.hpp"

namespace reloc {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

TEST(SceneSpec, DefaultsValidate) {
  EXPECT_NO_THROW(SceneSpec{}.validate());
  EXPECT_NO_THROW(test::tiny_spec().validate());
}

TEST(SceneSpec, RejectsBadValues) {
  auto bad = [](auto mutate) {
    SceneSpec s = test::tiny_spec();
    mutate(s);
    return code_of([&] { s.validate(); });
  };
  EXPECT_EQ(bad([](SceneSpec& s) { s.room_size.x() = 0.0; }), ErrorCode::InvalidSpec);
  EXPECT_EQ(bad([](SceneSpec& s) { s.loops = 0; }), ErrorCode::InvalidSpec);
  EXPECT_EQ(bad([](SceneSpec& s) { s.patch_scale = 7; }), ErrorCode::InvalidSpec);
  EXPECT_EQ(bad([](SceneSpec& s) { s.patch_scale = 64; }), ErrorCode::InvalidSpec);
  EXPECT_EQ(bad([](SceneSpec& s) { s.camera_height = 3.0; }), ErrorCode::InvalidSpec);
  EXPECT_EQ(bad([](SceneSpec& s) { s.depth_hole_probability = 1.5; }), ErrorCode::InvalidSpec);
  EXPECT_EQ(bad([](SceneSpec& s) { s.odometry_sigma_t = -1.0; }), ErrorCode::InvalidSpec);
  EXPECT_EQ(bad([](SceneSpec& s) { s.lane_distance = 5.0; }), ErrorCode::InvalidSpec);
}

TEST(SceneSpec, JsonParsing) {
  const auto s = parse_scene_spec(test::tiny_spec_json());
  EXPECT_EQ(s.keyframes_per_loop, 8);
  EXPECT_EQ(s.room_size, Vec3(4.0, 3.0, 2.6));
  EXPECT_EQ(s.feature_budget, 24);
  EXPECT_EQ(s.odometry_sigma_t, SceneSpec{}.odometry_sigma_t);
  EXPECT_EQ(parse_scene_spec(R"({"trajectory": "circle", "lane_distance": 1.0})").trajectory, TrajectoryKind::Circle);
  EXPECT_EQ(code_of([] { (void)parse_scene_spec(R"({"room": 1})"); }), ErrorCode::InvalidSpec);
  EXPECT_EQ(code_of([] { (void)parse_scene_spec(R"({"loops": 2,})"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { (void)parse_scene_spec(R"({"room_size": [1, 2]})"); }),
            ErrorCode::InvalidSpec);
  EXPECT_EQ(code_of([] { (void)parse_scene_spec(R"({"loops": "two"})"); }),
            ErrorCode::InvalidSpec);
  EXPECT_EQ(code_of([] { (void)parse_scene_spec("[1]"); }), ErrorCode::InvalidSpec);
}

TEST(Scene, DeterministicInSeed) {
  const auto a = generate_scene(test::tiny_spec(), 3);
  const auto b = generate_scene(test::tiny_spec(), 3);
  const auto c = generate_scene(test::tiny_spec(), 4);
  ASSERT_EQ(a.trajectory.size(), 16u);
  bool differs = false;
  for (std::size_t i = 0; i < a.trajectory.size(); ++i) {
    EXPECT_TRUE(a.trajectory[i].matrix() == b.trajectory[i].matrix());
    EXPECT_TRUE(a.odometry[i].matrix() == b.odometry[i].matrix());
    differs |= !(a.trajectory[i].matrix() == c.trajectory[i].matrix());
  }
  EXPECT_TRUE(differs);
  const auto ka = make_keyframe(a, 5);
  const auto kb = make_keyframe(b, 5);
  EXPECT_EQ(ka.rgb, kb.rgb);
  EXPECT_EQ(ka.depth, kb.depth);
  EXPECT_EQ(ka.features, kb.features);
}

TEST(Scene, ConsecutiveStepsAreBounded) {
  for (auto kind : {TrajectoryKind::Corridor, TrajectoryKind::Circle}) {
    SceneSpec s = test::tiny_spec();
    s.trajectory = kind;
    s.lane_distance = kind == TrajectoryKind::Circle ? 1.0 : 2.0;
    s.keyframes_per_loop = 28;
    const auto scene = generate_scene(s, 1);
    for (std::size_t i = 1; i < scene.trajectory.size(); ++i) {
      const Pose rel = scene.trajectory[i - 1].inverse() * scene.trajectory[i];
      EXPECT_LT(rel.translation.norm(), 0.5);
      EXPECT_LT(so3_log(rel.rotation).norm(), 0.3);
    }
  }
}

TEST(Scene, TooCoarseTrajectoryIsRejected) {
  SceneSpec s = test::tiny_spec();
  s.trajectory = TrajectoryKind::Circle;
  s.lane_distance = 1.0;
  s.keyframes_per_loop = 6;
  EXPECT_EQ(code_of([&] { (void)generate_scene(s, 1); }), ErrorCode::InvalidSpec);
}

TEST(Scene, OdometryStartsAtGroundTruthAndDrifts) {
  const auto scene = generate_scene(test::tiny_spec(), 2);
  EXPECT_TRUE(scene.odometry.front().matrix() == scene.trajectory.front().matrix());
  EXPECT_GT((scene.odometry.back().translation - scene.trajectory.back().translation).norm(),
            0.0);
  for (std::size_t i = 0; i < scene.loop_of.size(); ++i) {
    EXPECT_EQ(scene.loop_of[i], static_cast<int>(i / 8));
  }
}

TEST(Scene, RenderedDepthIsQuantizedAndInsideRoom) {
  const auto scene = generate_scene(test::tiny_spec(), 2);
  const auto view = render_view(scene, scene.trajectory[3], 0);
  const double diag = scene.spec.room_size.norm();
  for (double z : view.depth.values) {
    ASSERT_GT(z, 0.0);
    EXPECT_LE(z, diag);
    EXPECT_EQ(z, quantize_depth_mm(z));
  }
}

TEST(Scene, DepthHolesFollowProbability) {
  SceneSpec s = test::tiny_spec();
  s.depth_hole_probability = 0.25;
  const auto scene = generate_scene(s, 2);
  const auto view = render_view(scene, scene.trajectory[0], 7);
  const double frac = 1.0 - static_cast<double>(view.depth.valid_count()) / (32.0 * 32.0);
  EXPECT_NEAR(frac, 0.25, 0.06);
}

TEST(Scene, KeyframeFeaturesHonorBudgetAndMargin) {
  const auto scene = generate_scene(test::tiny_spec(), 2);
  const auto kf = make_keyframe(scene, 4);
  EXPECT_EQ(static_cast<int>(kf.features.size()), scene.spec.feature_budget);
  EXPECT_EQ(kf.patches.size(), kf.features.size());
  const int m = scene.spec.patch_scale / 2;
  for (const auto& p : kf.features) {
    EXPECT_GE(p.u, m);
    EXPECT_LE(p.u, 32 - m);
    EXPECT_GE(p.v, m);
    EXPECT_LE(p.v, 32 - m);
  }
}

TEST(Scene, MixSeedSpreadsStreams) {
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
  EXPECT_NE(mix_seed(1, 0), mix_seed(2, 0));
  EXPECT_EQ(mix_seed(9, 4), mix_seed(9, 4));
}

}  // namespace
}  // namespace reloc
