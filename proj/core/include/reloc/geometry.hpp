#pragma once

#include <Eigen/Core>
#include <optional>

namespace reloc {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Frame convention used throughout the library: a transform T_a^b maps
// point coordinates expressed in frame a into frame b. A keyframe pose is
// stored as T_cam^world (camera-to-world), matching the TUM trajectory
// convention.

/// Rigid transform with a 3x3 rotation matrix and a translation in meters.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Pose() = default;
  Pose(const Mat3& r, const Vec3& t) : rotation(r), translation(t) {}

  [[nodiscard]] static Pose identity() { return {}; }
  [[nodiscard]] static Pose from_quaternion(double qx, double qy, double qz, double qw,
                                            const Vec3& t);

  [[nodiscard]] Pose inverse() const;
  [[nodiscard]] Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  [[nodiscard]] Mat4 matrix() const;
  /// Unit quaternion (x, y, z, w) with w >= 0.
  [[nodiscard]] Eigen::Vector4d quaternion() const;
  /// ||R^T R - I||_inf
  [[nodiscard]] double orthonormality_error() const;
};

/// Returns the transform that applies b first, then a.
[[nodiscard]] Pose compose(const Pose& a, const Pose& b);
[[nodiscard]] inline Pose operator*(const Pose& a, const Pose& b) { return compose(a, b); }

/// se(3) tangent vector. rho is the translational part, phi the axis-angle
/// rotation. Stacked as [rho; phi] when flattened.
struct Twist {
  Vec3 rho = Vec3::Zero();
  Vec3 phi = Vec3::Zero();

  Twist() = default;
  Twist(const Vec3& r, const Vec3& p) : rho(r), phi(p) {}

  [[nodiscard]] static Twist from_vector(const Vec6& v) {
    return {v.head<3>(), v.tail<3>()};
  }
  [[nodiscard]] Vec6 vector() const {
    Vec6 v;
    v << rho, phi;
    return v;
  }
};

[[nodiscard]] Mat3 skew(const Vec3& v);
[[nodiscard]] Mat3 so3_exp(const Vec3& phi);
/// Principal-branch log. Throws AngleNearPi within kAngleNearPiTolerance of pi.
[[nodiscard]] Vec3 so3_log(const Mat3& rotation);
/// Left Jacobian of SO(3); maps rho to the translation of exp(twist).
[[nodiscard]] Mat3 so3_left_jacobian(const Vec3& phi);
[[nodiscard]] Mat3 so3_left_jacobian_inverse(const Vec3& phi);

[[nodiscard]] Pose se3_exp(const Twist& twist);
[[nodiscard]] Twist se3_log(const Pose& pose);
/// 4x4 matrix form of a twist.
[[nodiscard]] Mat4 hat(const Twist& twist);

/// Nearest rotation matrix (SVD projection).
[[nodiscard]] Mat3 orthonormalize(const Mat3& m);

inline constexpr double kAngleNearPiTolerance = 1e-6;
inline constexpr double kReorthonormalizeThreshold = 1e-12;

/// Pinhole intrinsics. Resolution in pixels.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  /// Throws InvalidArgument if fx, fy <= 0 or the principal point is outside the image.
  void validate() const;
  [[nodiscard]] long pixel_count() const { return static_cast<long>(width) * height; }
  bool operator==(const CameraIntrinsics&) const = default;
};

inline constexpr double kMinProjectionDepth = 1e-4;

struct PixelProjection {
  double u = 0.0;
  double v = 0.0;
  double z = 0.0;
  /// Integer pixel containing (u, v).
  [[nodiscard]] int col() const;
  [[nodiscard]] int row() const;
};

/// Projects a camera-frame point. Returns nullopt (out of view) when
/// z <= kMinProjectionDepth or floor(u), floor(v) fall outside the image.
[[nodiscard]] std::optional<PixelProjection> project(const CameraIntrinsics& k,
                                                     const Vec3& point_cam);

/// Projects without the in-image test; still nullopt behind the near plane.
[[nodiscard]] std::optional<PixelProjection> project_unbounded(const CameraIntrinsics& k,
                                                               const Vec3& point_cam);

/// Throws NonPositiveDepth if z <= 0.
[[nodiscard]] Vec3 backproject(const CameraIntrinsics& k, double u, double v, double z);

}  // namespace reloc
