#include <doctest.h>

#include <numbers>

#include "grio/geom.hpp"
#include "test_util.hpp"

using namespace grio;
using grio::test::axis_angle_matrix;

TEST_CASE("quat_exp") {
  const UnitQuaternion id = quat_exp(Vec3::Zero());
  CHECK(id.w() == 1.0);
  CHECK(id.vec().isZero(0.0));

  const UnitQuaternion half_turn = quat_exp(Vec3(0, 0, std::numbers::pi / 2));
  CHECK(std::abs(half_turn.w()) < 1e-12);
  CHECK(half_turn.z() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(quat_to_rotmat(half_turn).isApprox(axis_angle_matrix(Vec3::UnitZ(), std::numbers::pi), 1e-12));

  const UnitQuaternion tiny = quat_exp(Vec3(1e-9, 0, 0));
  CHECK(tiny.w() == doctest::Approx(1.0));
  CHECK(tiny.x() == doctest::Approx(1e-9).epsilon(1e-6));
}

TEST_CASE("quat_to_rotmat matches the axis-angle oracle") {
  CHECK(quat_to_rotmat(UnitQuaternion()).isApprox(Mat3::Identity()));
  const Mat3 rz = quat_to_rotmat(UnitQuaternion::from_axis_angle(Vec3::UnitZ(), std::numbers::pi));
  CHECK((rz - Vec3(-1, -1, 1).asDiagonal().toDenseMatrix()).norm() < 1e-12);
  const Mat3 rx = quat_to_rotmat(UnitQuaternion::from_axis_angle(Vec3::UnitX(), std::numbers::pi / 2));
  CHECK((rx * Vec3::UnitY() - Vec3::UnitZ()).norm() < 1e-12);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const Vec3 axis = test::random_vec(rng);
    const double angle = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
    const Mat3 R = quat_to_rotmat(UnitQuaternion::from_axis_angle(axis, angle));
    CHECK((R - axis_angle_matrix(axis, angle)).norm() < 1e-12);
    CHECK((R * R.transpose() - Mat3::Identity()).norm() < 1e-9);
    CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("unit quaternion invariants") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const UnitQuaternion a = test::random_rotation(rng);
    const UnitQuaternion b = test::random_rotation(rng);
    CHECK(a.wxyz().norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.w() >= 0.0);
    CHECK((quat_to_rotmat(a * b) - quat_to_rotmat(a) * quat_to_rotmat(b)).norm() < 1e-9);
    CHECK((a.rotate(Vec3(1, 2, 3)) - quat_to_rotmat(a) * Vec3(1, 2, 3)).norm() < 1e-12);

    Vec3 v = test::random_vec(rng);
    if (v.norm() >= std::numbers::pi / 2) v *= 0.5 / v.norm();
    const UnitQuaternion e = quat_exp(v) * quat_exp(-v);
    CHECK(e.angle() < 1e-9);

    Vec3 phi = test::random_vec(rng);
    if (phi.norm() >= 3.1) phi *= 3.0 / phi.norm();
    CHECK((rotation_log(rotation_exp(phi)) - phi).norm() < 1e-9);
  }
}

TEST_CASE("skew") {
  CHECK(skew(Vec3::Zero()).isZero(0.0));
  CHECK((skew(Vec3::UnitX()) * Vec3::UnitY() - Vec3::UnitZ()).norm() == 0.0);
  const Mat3 S = skew(Vec3(1, 2, 3));
  CHECK((S.transpose() + S).isZero(0.0));
  CHECK((S * Vec3(-4, 5, 0.5) - Vec3(1, 2, 3).cross(Vec3(-4, 5, 0.5))).norm() < 1e-14);
}

TEST_CASE("pose_relative") {
  std::mt19937_64 rng(11);
  const PoseSE3 a = test::random_pose(rng);
  const PoseSE3 same = pose_relative(a, a);
  CHECK(same.t.norm() == 0.0);
  CHECK(same.q.angle() < 1e-12);

  const PoseSE3 b = test::random_pose(rng);
  const PoseSE3 from_id = pose_relative(PoseSE3::identity(), b);
  CHECK((from_id.t - b.t).norm() < 1e-15);
  CHECK(test::rotation_distance(from_id.q, b.q) < 1e-12);

  PoseSE3 p1, p2;
  p1.t = Vec3(1, 0, 0);
  p2.t = Vec3(2, 0, 0);
  CHECK((pose_relative(p1, p2).t - Vec3(1, 0, 0)).norm() < 1e-15);

  for (int i = 0; i < 500; ++i) {
    const PoseSE3 x = test::random_pose(rng);
    const PoseSE3 y = test::random_pose(rng);
    const PoseSE3 back = pose_compose(x, pose_relative(x, y));
    CHECK((back.t - y.t).norm() < 1e-9);
    CHECK(test::rotation_distance(back.q, y.q) < 1e-9);

    const PoseSE3 ident = pose_compose(x, pose_inverse(x));
    CHECK(ident.t.norm() < 1e-9);
    CHECK(ident.q.angle() < 1e-9);

    // Frame-composition oracle on points.
    const Vec3 p = test::random_vec(rng);
    CHECK((pose_relative(x, y).transform(p) - x.q.conjugate().rotate(y.transform(p) - x.t)).norm() <
          1e-9);
  }
}
