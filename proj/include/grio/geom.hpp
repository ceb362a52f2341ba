#pragma once

#include <numbers>

#include <Eigen/Dense>

namespace grio {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

/// Unit quaternion stored as (w, x, y, z), always normalized and kept on the
/// w >= 0 hemisphere so that 2*acos(|w|) is a stable rotation angle.
class UnitQuaternion {
 public:
  UnitQuaternion() = default;
  UnitQuaternion(double w, double x, double y, double z);

  static UnitQuaternion identity() { return {}; }
  static UnitQuaternion from_axis_angle(const Vec3& axis, double angle);
  static UnitQuaternion from_rotation_matrix(const Mat3& R);

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }
  Vec3 vec() const { return {x_, y_, z_}; }
  /// Coefficients in (w, x, y, z) order.
  Vec4 wxyz() const { return {w_, x_, y_, z_}; }

  UnitQuaternion conjugate() const;
  Vec3 rotate(const Vec3& v) const;
  /// Rotation angle in [0, pi].
  double angle() const;

  friend UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b);

 private:
  double w_ = 1.0;
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 0.0;
};

/// Rigid transform: x_parent = q * x_child + t.
struct PoseSE3 {
  Vec3 t = Vec3::Zero();
  UnitQuaternion q;

  static PoseSE3 identity() { return {}; }
  Vec3 transform(const Vec3& p) const { return q.rotate(p) + t; }
};

/// Quaternion exponential of a half-angle vector: returns the rotation by
/// angle 2*|v| about v/|v|. Callers pass 0.5 * omega * dt or 0.5 * dtheta.
UnitQuaternion quat_exp(const Vec3& half_angle);

/// Rotation vector (axis * angle) to quaternion, i.e. quat_exp(phi / 2).
UnitQuaternion rotation_exp(const Vec3& phi);

/// Inverse of rotation_exp for angles below pi.
Vec3 rotation_log(const UnitQuaternion& q);

Mat3 quat_to_rotmat(const UnitQuaternion& q);

/// Cross-product matrix: skew(v) * u == v.cross(u).
Mat3 skew(const Vec3& v);

PoseSE3 pose_compose(const PoseSE3& a, const PoseSE3& b);
PoseSE3 pose_inverse(const PoseSE3& a);

/// Pose b expressed in the frame of pose a, i.e. inverse(a) * b.
/// pose_compose(a, pose_relative(a, b)) == b.
PoseSE3 pose_relative(const PoseSE3& a, const PoseSE3& b);

}  // namespace grio
