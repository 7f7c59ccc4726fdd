#include <gtest/gtest.h>

#include "reloc/dataset.hpp"
#include "reloc/error.hpp"
#include "test_support.hpp"

namespace reloc {
namespace {

ErrorCode load_error(const std::filesystem::path& dir) {
  try {
    (void)load_dataset(dir);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "load succeeded";
  return ErrorCode::Io;
}

class DatasetTest : public ::testing::Test {
 protected:
  void SetUp() override {
    scene_ = generate_scene(test::tiny_spec(), 4);
    data_ = build_dataset(scene_);
    save_dataset(dir_.path(), data_);
  }
  test::TempDir dir_;
  SyntheticScene scene_;
  Dataset data_;
};

TEST_F(DatasetTest, RoundTripsEverything) {
  const auto back = load_dataset(dir_.path());
  ASSERT_EQ(back.size(), data_.size());
  EXPECT_EQ(back.intrinsics, data_.intrinsics);
  EXPECT_EQ(back.loop_of, data_.loop_of);
  EXPECT_EQ(back.loop_count(), 2);
  EXPECT_EQ(back.loop_members(1), (std::vector<int>{8, 9, 10, 11, 12, 13, 14, 15}));
  ASSERT_EQ(back.odometry.size(), data_.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    const auto& a = back.keyframes[i];
    const auto& b = data_.keyframes[i];
    EXPECT_EQ(a.rgb, b.rgb);
    EXPECT_EQ(a.depth, b.depth);
    EXPECT_EQ(a.features, b.features);
    EXPECT_EQ(a.patches, b.patches);
    EXPECT_TRUE(back.poses[i].pose.matrix() == data_.poses[i].pose.matrix());
    EXPECT_TRUE(back.odometry[i].pose.matrix() == data_.odometry[i].pose.matrix());
  }
}

TEST_F(DatasetTest, MatchesSceneGroundTruth) {
  for (std::size_t i = 0; i < data_.size(); ++i) {
    EXPECT_TRUE(data_.poses[i].pose.matrix() == scene_.trajectory[i].matrix());
    EXPECT_EQ(data_.keyframes[i].depth, make_keyframe(scene_, static_cast<int>(i)).depth);
  }
}

TEST_F(DatasetTest, IndependentOfThreadCount) {
  const auto four = build_dataset(scene_, 4);
  for (std::size_t i = 0; i < data_.size(); ++i) {
    EXPECT_EQ(four.keyframes[i].rgb, data_.keyframes[i].rgb);
    EXPECT_EQ(four.keyframes[i].features, data_.keyframes[i].features);
  }
}

TEST_F(DatasetTest, MissingDepthIsReported) {
  std::filesystem::remove(dir_ / "depth/000003.pgm");
  EXPECT_EQ(load_error(dir_.path()), ErrorCode::MissingDepth);
}

TEST_F(DatasetTest, IntrinsicsMismatchIsReported) {
  test::spit(dir_ / "intrinsics.txt", "16 16 8 8 16 16\n");
  EXPECT_EQ(load_error(dir_.path()), ErrorCode::IntrinsicsMismatch);
}

TEST_F(DatasetTest, MalformedFeaturesAreParseErrors) {
  test::spit(dir_ / "features.txt", "0 8 2 10 10 11\n");
  EXPECT_EQ(load_error(dir_.path()), ErrorCode::ParseError);
  test::spit(dir_ / "features.txt", "0 8 1 0 0\n");  // patch leaves the image
  EXPECT_EQ(load_error(dir_.path()), ErrorCode::ParseError);
}

TEST_F(DatasetTest, OptionalFilesMayBeAbsent) {
  std::filesystem::remove(dir_ / "features.txt");
  std::filesystem::remove(dir_ / "loops.txt");
  std::filesystem::remove(dir_ / "odometry.txt");
  const auto back = load_dataset(dir_.path());
  EXPECT_EQ(back.size(), data_.size());
  EXPECT_TRUE(back.keyframes[0].features.empty());
  EXPECT_TRUE(back.odometry.empty());
}

TEST(Dataset, MissingDirectoryIsIo) {
  EXPECT_EQ(load_error("/nonexistent/reloc/data"), ErrorCode::Io);
}

TEST(Intrinsics, RoundTrip) {
  test::TempDir dir;
  const auto k = test::tiny_spec().intrinsics();
  write_intrinsics(dir / "k.txt", k);
  EXPECT_EQ(read_intrinsics(dir / "k.txt"), k);
  test::spit(dir / "bad.txt", "1 2 3\n");
  EXPECT_THROW((void)read_intrinsics(dir / "bad.txt"), Error);
}

}  // namespace
}  // namespace reloc
