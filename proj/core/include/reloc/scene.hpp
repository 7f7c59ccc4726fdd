#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "reloc/geometry.hpp"
#include "reloc/keyframe.hpp"
#include "reloc/trajectory_io.hpp"

namespace reloc {

enum class TrajectoryKind {
  /// Sideways-looking passes along a corridor wall; odd passes run backwards.
  Corridor,
  /// Outward-looking laps around the room center; odd laps run clockwise.
  Circle,
};

struct BoxObstacle {
  Vec3 center = Vec3::Zero();
  Vec3 size = Vec3::Ones();
};

/// Parameters for a procedurally generated box room and camera path.
/// Units are meters and radians unless noted.
struct SceneSpec {
  Vec3 room_size{8.0, 3.0, 2.6};  // x extent, y extent, z (height)
  TrajectoryKind trajectory = TrajectoryKind::Corridor;
  int loops = 2;
  int keyframes_per_loop = 20;

  int image_width = 64;
  int image_height = 64;
  double focal_length = 32.0;  // pixels, fx = fy

  double camera_height = 1.3;
  /// Corridor: distance of the camera lane from the viewed wall.
  /// Circle: lap radius.
  double lane_distance = 1.8;
  /// Corridor: distance kept from the end walls.
  double end_margin = 0.5;

  double jitter_translation = 0.02;
  double jitter_rotation = 0.02;

  double checker_size = 0.25;
  double depth_hole_probability = 0.0;
  std::vector<BoxObstacle> obstacles;

  /// Noise injected per step into the simulated odometry trajectory.
  double odometry_sigma_t = 0.02;
  double odometry_sigma_r = 0.01;

  int feature_budget = 128;
  int patch_scale = 16;
  bool augment_low_texture = true;

  /// Throws InvalidSpec.
  void validate() const;
  [[nodiscard]] CameraIntrinsics intrinsics() const;
  [[nodiscard]] int keyframe_count() const { return loops * keyframes_per_loop; }
};

/// JSON scene spec. Unknown keys are rejected; missing keys keep defaults.
[[nodiscard]] SceneSpec parse_scene_spec(const std::string& json_text);
[[nodiscard]] SceneSpec load_scene_spec(const std::filesystem::path& path);

struct CheckerTexture {
  std::array<std::uint8_t, 3> color_a{200, 200, 200};
  std::array<std::uint8_t, 3> color_b{60, 60, 60};
  double cell = 0.25;
  std::uint64_t noise_seed = 0;
};

/// Parallelogram origin + s*edge_u + t*edge_v, s, t in [0, 1].
struct TexturedQuad {
  Vec3 origin;
  Vec3 edge_u;
  Vec3 edge_v;
  CheckerTexture texture;
  double shade = 1.0;
};

struct SyntheticScene {
  SceneSpec spec;
  std::uint64_t seed = 0;
  std::vector<TexturedQuad> geometry;
  std::vector<Pose> trajectory;  // ground truth, camera-to-world
  std::vector<int> loop_of;      // loop index per keyframe
  std::vector<Pose> odometry;    // drifting front-end estimate
  CameraIntrinsics intrinsics;
};

/// Deterministic in (spec, seed). Throws InvalidSpec.
[[nodiscard]] SyntheticScene generate_scene(const SceneSpec& spec, std::uint64_t seed);

struct RenderedView {
  RgbImage rgb;
  DepthMap depth;
};

/// Ray-casts every pixel center against the scene quads. Depth is the
/// camera-frame z of the nearest hit, quantized to millimeters.
[[nodiscard]] RenderedView render_view(const SyntheticScene& scene, const Pose& camera_to_world,
                                       std::uint64_t hole_seed);

/// Keyframe `index`: rendered view, selected (and if needed augmented)
/// features, patches at the spec's scale.
[[nodiscard]] Keyframe make_keyframe(const SyntheticScene& scene, int index);

/// splitmix64 step; used to derive independent per-item seeds.
[[nodiscard]] std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace reloc
