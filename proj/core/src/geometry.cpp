#include "reloc/geometry.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <cmath>
#include <numbers>
#include <string>

#include "reloc/error.hpp"

namespace reloc {

namespace {

constexpr double kSmallAngle = 1e-5;

}  // namespace

Pose Pose::from_quaternion(double qx, double qy, double qz, double qw, const Vec3& t) {
  Eigen::Quaterniond q(qw, qx, qy, qz);
  if (!(q.norm() > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "zero-norm quaternion");
  }
  return {q.normalized().toRotationMatrix(), t};
}

Pose Pose::inverse() const {
  const Mat3 rt = rotation.transpose();
  return {rt, -(rt * translation)};
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Eigen::Vector4d Pose::quaternion() const {
  Eigen::Quaterniond q(rotation);
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return {q.x(), q.y(), q.z(), q.w()};
}

double Pose::orthonormality_error() const {
  return (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Pose compose(const Pose& a, const Pose& b) {
  Pose out(a.rotation * b.rotation, a.rotation * b.translation + a.translation);
  if (out.orthonormality_error() > kReorthonormalizeThreshold) {
    out.rotation = orthonormalize(out.rotation);
  }
  return out;
}

Mat3 orthonormalize(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) = -u.col(2);
  return u * v.transpose();
}

Mat3 skew(const Vec3& v) {
  Mat3 s;
  // clang-format off
  s <<    0.0, -v.z(),  v.y(),
        v.z(),    0.0, -v.x(),
       -v.y(),  v.x(),    0.0;
  // clang-format on
  return s;
}

Mat3 so3_exp(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 k = skew(phi);
  if (theta < kSmallAngle) {
    return Mat3::Identity() + k + 0.5 * k * k;
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Mat3::Identity() + a * k + b * k * k;
}

Vec3 so3_log(const Mat3& r) {
  const Vec3 w = 0.5 * Vec3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double s = w.norm();
  const double c = 0.5 * (r.trace() - 1.0);
  const double theta = std::atan2(s, c);
  if (theta > std::numbers::pi - kAngleNearPiTolerance) {
    throw Error(ErrorCode::AngleNearPi,
                "rotation angle " + std::to_string(theta) + " is within tolerance of pi");
  }
  if (theta < kSmallAngle) {
    return (1.0 + theta * theta / 6.0) * w;
  }
  return (theta / s) * w;
}

Mat3 so3_left_jacobian(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 k = skew(phi);
  if (theta < kSmallAngle) {
    return Mat3::Identity() + 0.5 * k + k * k / 6.0;
  }
  const double t2 = theta * theta;
  return Mat3::Identity() + ((1.0 - std::cos(theta)) / t2) * k +
         ((theta - std::sin(theta)) / (t2 * theta)) * k * k;
}

Mat3 so3_left_jacobian_inverse(const Vec3& phi) {
  const double theta = phi.norm();
  const Mat3 k = skew(phi);
  if (theta < kSmallAngle) {
    return Mat3::Identity() - 0.5 * k + k * k / 12.0;
  }
  const double t2 = theta * theta;
  const double c =
      1.0 / t2 - (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  return Mat3::Identity() - 0.5 * k + c * k * k;
}

Pose se3_exp(const Twist& twist) {
  return {so3_exp(twist.phi), so3_left_jacobian(twist.phi) * twist.rho};
}

Twist se3_log(const Pose& pose) {
  const Vec3 phi = so3_log(pose.rotation);
  return {so3_left_jacobian_inverse(phi) * pose.translation, phi};
}

Mat4 hat(const Twist& twist) {
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<3, 3>() = skew(twist.phi);
  m.topRightCorner<3, 1>() = twist.rho;
  return m;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::InvalidArgument, "resolution must be positive");
  }
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw Error(ErrorCode::InvalidArgument, "principal point outside the image");
  }
}

int PixelProjection::col() const { return static_cast<int>(std::floor(u)); }
int PixelProjection::row() const { return static_cast<int>(std::floor(v)); }

std::optional<PixelProjection> project_unbounded(const CameraIntrinsics& k,
                                                 const Vec3& p) {
  if (!(p.z() > kMinProjectionDepth)) return std::nullopt;
  return PixelProjection{k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy, p.z()};
}

std::optional<PixelProjection> project(const CameraIntrinsics& k, const Vec3& p) {
  auto px = project_unbounded(k, p);
  if (!px) return std::nullopt;
  // Guard the float->int conversion before flooring.
  if (!(px->u >= 0.0 && px->u < k.width && px->v >= 0.0 && px->v < k.height)) {
    return std::nullopt;
  }
  const int c = px->col();
  const int r = px->row();
  if (c < 0 || c > k.width - 1 || r < 0 || r > k.height - 1) return std::nullopt;
  return px;
}

Vec3 backproject(const CameraIntrinsics& k, double u, double v, double z) {
  if (!(z > 0.0)) {
    throw Error(ErrorCode::NonPositiveDepth, "backprojection depth must be positive");
  }
  return {(u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z};
}

}  // namespace reloc
