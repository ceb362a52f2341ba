#include "grio/geom.hpp"

#include <cmath>

namespace grio {

UnitQuaternion::UnitQuaternion(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(n > 0.0) || !std::isfinite(n)) {
    return;  // identity
  }
  const double s = (w < 0.0 ? -1.0 : 1.0) / n;
  w_ = w * s;
  x_ = x * s;
  y_ = y * s;
  z_ = z * s;
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis, double angle) {
  return quat_exp(0.5 * angle * axis.normalized());
}

UnitQuaternion UnitQuaternion::from_rotation_matrix(const Mat3& R) {
  const Eigen::Quaterniond q(R);
  return {q.w(), q.x(), q.y(), q.z()};
}

UnitQuaternion UnitQuaternion::conjugate() const {
  UnitQuaternion c;
  c.w_ = w_;
  c.x_ = -x_;
  c.y_ = -y_;
  c.z_ = -z_;
  return c;
}

Vec3 UnitQuaternion::rotate(const Vec3& v) const {
  const Vec3 u = vec();
  const Vec3 t = 2.0 * u.cross(v);
  return v + w_ * t + u.cross(t);
}

double UnitQuaternion::angle() const {
  return 2.0 * std::atan2(vec().norm(), std::abs(w_));
}

UnitQuaternion operator*(const UnitQuaternion& a, const UnitQuaternion& b) {
  return {a.w_ * b.w_ - a.x_ * b.x_ - a.y_ * b.y_ - a.z_ * b.z_,
          a.w_ * b.x_ + a.x_ * b.w_ + a.y_ * b.z_ - a.z_ * b.y_,
          a.w_ * b.y_ - a.x_ * b.z_ + a.y_ * b.w_ + a.z_ * b.x_,
          a.w_ * b.z_ + a.x_ * b.y_ - a.y_ * b.x_ + a.z_ * b.w_};
}

UnitQuaternion quat_exp(const Vec3& half_angle) {
  const double theta = half_angle.norm();
  if (theta < 1e-12) {
    return {1.0, half_angle.x(), half_angle.y(), half_angle.z()};
  }
  const Vec3 v = std::sin(theta) / theta * half_angle;
  return {std::cos(theta), v.x(), v.y(), v.z()};
}

UnitQuaternion rotation_exp(const Vec3& phi) { return quat_exp(0.5 * phi); }

Vec3 rotation_log(const UnitQuaternion& q) {
  const Vec3 v = q.vec();
  const double n = v.norm();
  if (n < 1e-12) {
    return 2.0 * v / q.w();
  }
  return 2.0 * std::atan2(n, q.w()) / n * v;
}

Mat3 quat_to_rotmat(const UnitQuaternion& q) {
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  Mat3 R;
  R << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
      2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
      2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
  return R;
}

Mat3 skew(const Vec3& v) {
  Mat3 S;
  S << 0.0, -v.z(), v.y(),
      v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return S;
}

PoseSE3 pose_compose(const PoseSE3& a, const PoseSE3& b) {
  return {a.q.rotate(b.t) + a.t, a.q * b.q};
}

PoseSE3 pose_inverse(const PoseSE3& a) {
  const UnitQuaternion qi = a.q.conjugate();
  return {-qi.rotate(a.t), qi};
}

PoseSE3 pose_relative(const PoseSE3& a, const PoseSE3& b) {
  const UnitQuaternion qi = a.q.conjugate();
  return {qi.rotate(b.t - a.t), qi * b.q};
}

}  // namespace grio
