#include "reloc/scene.hpp"

#include <fmt/format.h>

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "reloc/error.hpp"
#include "reloc/features.hpp"

namespace reloc {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

constexpr double kMaxStepTranslation = 0.5;
constexpr double kMaxStepRotation = 0.3;

double unit_hash(std::uint64_t seed, std::int64_t a, std::int64_t b, std::uint64_t c = 0) {
  const std::uint64_t h =
      mix_seed(mix_seed(mix_seed(seed, static_cast<std::uint64_t>(a)), static_cast<std::uint64_t>(b)), c);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace

void SceneSpec::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::InvalidSpec, why); };
  if (!(room_size.x() > 0.0 && room_size.y() > 0.0 && room_size.z() > 0.0)) {
    fail("room dimensions must be positive");
  }
  if (loops < 1 || keyframes_per_loop < 1) fail("loops and keyframes_per_loop must be >= 1");
  if (keyframe_count() < 2) fail("trajectory needs at least two keyframes");
  if (image_width <= 0 || image_height <= 0) fail("image resolution must be positive");
  if (!(focal_length > 0.0)) fail("focal_length must be positive");
  if (!(camera_height > 0.0 && camera_height < room_size.z())) {
    fail("camera_height must lie inside the room");
  }
  if (!(lane_distance > 0.0)) fail("lane_distance must be positive");
  if (patch_scale <= 0 || patch_scale % 2 != 0) fail("patch_scale must be a positive even number");
  if (2 * (patch_scale / 2) > std::min(image_width, image_height)) {
    fail("patch_scale exceeds the image");
  }
  if (feature_budget < 1) fail("feature_budget must be >= 1");
  if (!(checker_size > 0.0)) fail("checker_size must be positive");
  if (!(depth_hole_probability >= 0.0 && depth_hole_probability <= 1.0)) {
    fail("depth_hole_probability must be in [0, 1]");
  }
  if (jitter_translation < 0.0 || jitter_rotation < 0.0 || odometry_sigma_t < 0.0 ||
      odometry_sigma_r < 0.0) {
    fail("noise levels must be nonnegative");
  }
  for (const auto& o : obstacles) {
    if (!(o.size.minCoeff() > 0.0)) fail("obstacle sizes must be positive");
  }
  switch (trajectory) {
    case TrajectoryKind::Corridor:
      if (!(lane_distance < room_size.y())) fail("corridor lane lies outside the room");
      if (!(2.0 * end_margin < room_size.x()) || end_margin < 0.0) {
        fail("corridor end_margin leaves no room to travel");
      }
      if (keyframes_per_loop < 2) fail("corridor passes need at least two keyframes");
      break;
    case TrajectoryKind::Circle:
      if (!(2.0 * lane_distance < std::min(room_size.x(), room_size.y()))) {
        fail("circle radius does not fit in the room");
      }
      if (keyframes_per_loop < 2) fail("circle laps need at least two keyframes");
      break;
  }
}

CameraIntrinsics SceneSpec::intrinsics() const {
  CameraIntrinsics k;
  k.fx = focal_length;
  k.fy = focal_length;
  k.cx = 0.5 * image_width;
  k.cy = 0.5 * image_height;
  k.width = image_width;
  k.height = image_height;
  return k;
}

SceneSpec parse_scene_spec(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("scene spec: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::InvalidSpec, "scene spec must be a JSON object");

  SceneSpec s;
  auto vec3 = [](const nlohmann::json& v, const char* key) {
    if (!v.is_array() || v.size() != 3) {
      throw Error(ErrorCode::InvalidSpec, fmt::format("'{}' must be an array of 3 numbers", key));
    }
    return Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
  };
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "room_size") s.room_size = vec3(value, "room_size");
      else if (key == "trajectory") {
        const auto kind = value.get<std::string>();
        if (kind == "corridor") s.trajectory = TrajectoryKind::Corridor;
        else if (kind == "circle") s.trajectory = TrajectoryKind::Circle;
        else throw Error(ErrorCode::InvalidSpec, "trajectory must be 'corridor' or 'circle'");
      }
      else if (key == "loops") s.loops = value.get<int>();
      else if (key == "keyframes_per_loop") s.keyframes_per_loop = value.get<int>();
      else if (key == "image_width") s.image_width = value.get<int>();
      else if (key == "image_height") s.image_height = value.get<int>();
      else if (key == "focal_length") s.focal_length = value.get<double>();
      else if (key == "camera_height") s.camera_height = value.get<double>();
      else if (key == "lane_distance") s.lane_distance = value.get<double>();
      else if (key == "end_margin") s.end_margin = value.get<double>();
      else if (key == "jitter_translation") s.jitter_translation = value.get<double>();
      else if (key == "jitter_rotation") s.jitter_rotation = value.get<double>();
      else if (key == "checker_size") s.checker_size = value.get<double>();
      else if (key == "depth_hole_probability") s.depth_hole_probability = value.get<double>();
      else if (key == "odometry_sigma_t") s.odometry_sigma_t = value.get<double>();
      else if (key == "odometry_sigma_r") s.odometry_sigma_r = value.get<double>();
      else if (key == "feature_budget") s.feature_budget = value.get<int>();
      else if (key == "patch_scale") s.patch_scale = value.get<int>();
      else if (key == "augment_low_texture") s.augment_low_texture = value.get<bool>();
      else if (key == "obstacles") {
        for (const auto& o : value) {
          s.obstacles.push_back({vec3(o.at("center"), "center"), vec3(o.at("size"), "size")});
        }
      } else {
        throw Error(ErrorCode::InvalidSpec, fmt::format("unknown scene spec key '{}'", key));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidSpec, std::string("scene spec: ") + e.what());
  }
  s.validate();
  return s;
}

SceneSpec load_scene_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open scene spec " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scene_spec(buf.str());
}

namespace {

CheckerTexture random_texture(std::mt19937_64& rng, double cell) {
  std::uniform_int_distribution<int> bright(150, 245);
  std::uniform_int_distribution<int> dark(20, 110);
  CheckerTexture t;
  for (int c = 0; c < 3; ++c) {
    t.color_a[c] = static_cast<std::uint8_t>(bright(rng));
    t.color_b[c] = static_cast<std::uint8_t>(dark(rng));
  }
  t.cell = cell;
  t.noise_seed = rng();
  return t;
}

void add_box_faces(std::vector<TexturedQuad>& out, const Vec3& lo, const Vec3& hi,
                   std::mt19937_64& rng, double cell) {
  const Vec3 d = hi - lo;
  const Vec3 ex(d.x(), 0, 0), ey(0, d.y(), 0), ez(0, 0, d.z());
  const double shades[6] = {0.85, 1.0, 0.9, 0.95, 0.8, 0.75};
  const TexturedQuad faces[6] = {
      {lo, ex, ey, {}, 1.0},                       // z = lo (floor)
      {lo + ez, ex, ey, {}, 1.0},                  // z = hi (ceiling)
      {lo, ex, ez, {}, 1.0},                       // y = lo
      {lo + ey, ex, ez, {}, 1.0},                  // y = hi
      {lo, ey, ez, {}, 1.0},                       // x = lo
      {lo + ex, ey, ez, {}, 1.0},                  // x = hi
  };
  for (int f = 0; f < 6; ++f) {
    TexturedQuad q = faces[f];
    q.texture = random_texture(rng, cell);
    q.shade = shades[f];
    out.push_back(q);
  }
}

Pose look_pose(const Vec3& position, const Vec3& forward, double pitch, double yaw) {
  // Camera axes: z forward, y down (world -z), x = y cross z.
  const Vec3 z = forward.normalized();
  const Vec3 y(0.0, 0.0, -1.0);
  const Vec3 x = y.cross(z).normalized();
  Mat3 base;
  base.col(0) = x;
  base.col(1) = z.cross(x);
  base.col(2) = z;
  const Mat3 perturb = so3_exp(Vec3(0.0, 0.0, yaw)) * so3_exp(pitch * x);
  return {orthonormalize(perturb * base), position};
}

double rotation_angle(const Mat3& r) {
  const double c = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  return std::acos(c);
}

}  // namespace

SyntheticScene generate_scene(const SceneSpec& spec, std::uint64_t seed) {
  spec.validate();
  SyntheticScene scene;
  scene.spec = spec;
  scene.seed = seed;
  scene.intrinsics = spec.intrinsics();

  std::mt19937_64 tex_rng(mix_seed(seed, 101));
  add_box_faces(scene.geometry, Vec3::Zero(), spec.room_size, tex_rng, spec.checker_size);
  for (const auto& o : spec.obstacles) {
    add_box_faces(scene.geometry, o.center - 0.5 * o.size, o.center + 0.5 * o.size, tex_rng,
                  spec.checker_size);
  }

  std::mt19937_64 traj_rng(mix_seed(seed, 202));
  std::normal_distribution<double> jt(0.0, 1.0);
  const int per_loop = spec.keyframes_per_loop;
  const Vec3 center(0.5 * spec.room_size.x(), 0.5 * spec.room_size.y(), spec.camera_height);

  for (int loop = 0; loop < spec.loops; ++loop) {
    const bool reversed = loop % 2 == 1;
    for (int p = 0; p < per_loop; ++p) {
      Vec3 position;
      Vec3 forward;
      if (spec.trajectory == TrajectoryKind::Corridor) {
        const double x0 = spec.end_margin;
        const double x1 = spec.room_size.x() - spec.end_margin;
        const double f = static_cast<double>(p) / (per_loop - 1);
        const double x = reversed ? x1 - f * (x1 - x0) : x0 + f * (x1 - x0);
        position = Vec3(x, spec.room_size.y() - spec.lane_distance, spec.camera_height);
        forward = Vec3(0.0, 1.0, 0.0);
      } else {
        const double step = 2.0 * std::numbers::pi / per_loop;
        const double angle = reversed ? -step * p : step * p;
        forward = Vec3(std::cos(angle), std::sin(angle), 0.0);
        position = center + spec.lane_distance * forward;
        position.z() = spec.camera_height;
      }
      const Vec3 jitter(jt(traj_rng), jt(traj_rng), jt(traj_rng));
      const double pitch = spec.jitter_rotation * jt(traj_rng);
      const double yaw = spec.jitter_rotation * jt(traj_rng);
      scene.trajectory.push_back(
          canonicalize_rotation(look_pose(position + spec.jitter_translation * jitter, forward,
                                          pitch, yaw)));
      scene.loop_of.push_back(loop);
    }
  }

  for (std::size_t i = 1; i < scene.trajectory.size(); ++i) {
    const Pose rel = scene.trajectory[i - 1].inverse() * scene.trajectory[i];
    const double dt = rel.translation.norm();
    const double dr = rotation_angle(rel.rotation);
    if (!(dt < kMaxStepTranslation) || !(dr < kMaxStepRotation)) {
      throw Error(ErrorCode::InvalidSpec,
                  fmt::format("keyframes {} -> {} move {:.3f} m / {:.3f} rad; consecutive motion "
                              "must stay below {} m and {} rad",
                              i - 1, i, dt, dr, kMaxStepTranslation, kMaxStepRotation));
    }
  }

  std::mt19937_64 odo_rng(mix_seed(seed, 303));
  scene.odometry.push_back(scene.trajectory.front());
  for (std::size_t i = 1; i < scene.trajectory.size(); ++i) {
    const Pose rel = scene.trajectory[i - 1].inverse() * scene.trajectory[i];
    const Twist noise(spec.odometry_sigma_t * Vec3(jt(odo_rng), jt(odo_rng), jt(odo_rng)),
                      spec.odometry_sigma_r * Vec3(jt(odo_rng), jt(odo_rng), jt(odo_rng)));
    scene.odometry.push_back(canonicalize_rotation(scene.odometry.back() * rel * se3_exp(noise)));
  }
  return scene;
}

namespace {

struct Hit {
  double depth = std::numeric_limits<double>::infinity();
  const TexturedQuad* quad = nullptr;
  double a = 0.0;  // meters along edge_u
  double b = 0.0;  // meters along edge_v
};

std::array<std::uint8_t, 3> shade_hit(const Hit& hit) {
  const auto& tex = hit.quad->texture;
  const auto ia = static_cast<std::int64_t>(std::floor(hit.a / tex.cell));
  const auto ib = static_cast<std::int64_t>(std::floor(hit.b / tex.cell));
  const bool odd = ((ia + ib) & 1) != 0;
  const auto& base = odd ? tex.color_b : tex.color_a;
  std::array<std::uint8_t, 3> out{};
  for (int c = 0; c < 3; ++c) {
    // Per-cell color variation makes each wall location distinguishable.
    const double jitter = 70.0 * (unit_hash(tex.noise_seed, ia, ib, c) - 0.5);
    const double value = hit.quad->shade * (base[c] + jitter);
    out[c] = static_cast<std::uint8_t>(std::clamp(std::lround(value), 0L, 255L));
  }
  return out;
}

}  // namespace

RenderedView render_view(const SyntheticScene& scene, const Pose& camera_to_world,
                         std::uint64_t hole_seed) {
  const auto& k = scene.intrinsics;
  RenderedView view{RgbImage(k.width, k.height), DepthMap(k.width, k.height)};
  const Vec3 origin = camera_to_world.translation;
  const double hole_p = scene.spec.depth_hole_probability;

  for (int r = 0; r < k.height; ++r) {
    for (int c = 0; c < k.width; ++c) {
      // Camera-frame ray with unit z: the ray parameter equals camera depth.
      const Vec3 ray_cam = backproject(k, c + 0.5, r + 0.5, 1.0);
      const Vec3 dir = camera_to_world.rotation * ray_cam;
      Hit best;
      for (const auto& q : scene.geometry) {
        const Vec3 n = q.edge_u.cross(q.edge_v);
        const double denom = n.dot(dir);
        if (std::abs(denom) < 1e-12) continue;
        const double s = n.dot(q.origin - origin) / denom;
        if (!(s > 1e-9) || !(s < best.depth)) continue;
        const Vec3 rel = origin + s * dir - q.origin;
        const double lu = q.edge_u.squaredNorm();
        const double lv = q.edge_v.squaredNorm();
        const double a = rel.dot(q.edge_u) / lu;
        const double b = rel.dot(q.edge_v) / lv;
        if (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0) continue;
        best = {s, &q, a * std::sqrt(lu), b * std::sqrt(lv)};
      }
      if (best.quad == nullptr) continue;
      const auto color = shade_hit(best);
      for (int ch = 0; ch < 3; ++ch) view.rgb.at(c, r, ch) = color[ch];
      const bool hole = hole_p > 0.0 && unit_hash(hole_seed, c, r) < hole_p;
      view.depth.at(c, r) = hole ? 0.0 : quantize_depth_mm(best.depth);
    }
  }
  return view;
}

Keyframe make_keyframe(const SyntheticScene& scene, int index) {
  const auto& spec = scene.spec;
  const auto view = render_view(scene, scene.trajectory.at(index), mix_seed(scene.seed, 1000 + index));
  Keyframe kf;
  kf.id = index;
  kf.timestamp = index / 10.0;
  kf.rgb = view.rgb;
  kf.depth = view.depth;
  const int margin = spec.patch_scale / 2;
  kf.features = select_features(kf.rgb, spec.feature_budget, margin,
                                mix_seed(scene.seed, 5000 + index), &kf.depth);
  if (spec.augment_low_texture && !kf.features.empty() &&
      static_cast<int>(kf.features.size()) < spec.feature_budget) {
    kf.features = augment_low_texture(kf.features, spec.feature_budget, 0.5 * kf.rgb.width,
                                      0.5 * kf.rgb.height, kf.rgb.width, kf.rgb.height, margin,
                                      mix_seed(scene.seed, 9000 + index));
  }
  kf.patches = extract_patches(kf.rgb, kf.features, spec.patch_scale);
  return kf;
}

}  // namespace reloc
