#include "grio/ekf.hpp"

#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>
#include <spdlog/spdlog.h>

namespace grio {

std::string_view to_string(UpdateStatus status) {
  switch (status) {
    case UpdateStatus::applied:
      return "applied";
    case UpdateStatus::gated:
      return "gated";
    case UpdateStatus::singular:
      return "singular";
    case UpdateStatus::rejected:
      return "rejected";
  }
  return "unknown";
}

EkfState init_filter(const NoiseParams& noise) {
  EkfState s;
  s.P.block<3, 3>(idx::ba, idx::ba) = Mat3::Identity() * noise.eta_ba * noise.eta_ba;
  s.P.block<3, 3>(idx::bw, idx::bw) = Mat3::Identity() * noise.eta_bw * noise.eta_bw;
  // Roll and pitch only: yaw is unobservable without a compass.
  const double var_theta = noise.eta_theta * noise.eta_theta;
  s.P(idx::dtheta, idx::dtheta) = var_theta;
  s.P(idx::dtheta + 1, idx::dtheta + 1) = var_theta;
  return s;
}

EkfState strapdown(const EkfState& state, const Vec3& accel, const Vec3& gyro, double dt) {
  EkfState s = state;
  const Vec3 acc_world = state.q.rotate(accel - state.b_a) + gravity();
  s.p = state.p + state.v * dt + 0.5 * acc_world * dt * dt;
  s.v = state.v + acc_world * dt;
  s.q = state.q * quat_exp(0.5 * (gyro - state.b_w) * dt);
  return s;
}

StrapdownLinearization linearize_strapdown(const EkfState& state, const Vec3& accel,
                                           const Vec3& gyro, double dt, const NoiseParams& noise) {
  (void)gyro;
  const Mat3 C = quat_to_rotmat(state.q);
  const Mat3 I = Mat3::Identity();
  const Mat3 f_skew = skew(C * (accel - state.b_a));
  const double dt2 = dt * dt;

  StrapdownLinearization lin;
  lin.F.setIdentity();
  lin.F.block<3, 3>(idx::p, idx::v) = I * dt;
  lin.F.block<3, 3>(idx::p, idx::ba) = -0.5 * C * dt2;
  lin.F.block<3, 3>(idx::p, idx::dtheta) = -0.5 * f_skew * dt2;
  lin.F.block<3, 3>(idx::v, idx::ba) = -C * dt;
  lin.F.block<3, 3>(idx::v, idx::dtheta) = -f_skew * dt;
  lin.F.block<3, 3>(idx::dtheta, idx::bw) = -C * dt;

  // Noise order: w_v, w_theta, w_a, w_w, w_ba, w_bw.
  constexpr int nv = 0, nth = 3, na = 6, nw = 9, nba = 12, nbw = 15;
  lin.N.setZero();
  lin.N.block<3, 3>(idx::p, na) = 0.5 * C * dt2;
  lin.N.block<3, 3>(idx::v, na) = C * dt;
  lin.N.block<3, 3>(idx::dtheta, nw) = C * dt;
  lin.N.block<3, 3>(idx::v, nv) = I;
  lin.N.block<3, 3>(idx::dtheta, nth) = I;
  lin.N.block<3, 3>(idx::ba, nba) = I;
  lin.N.block<3, 3>(idx::bw, nbw) = I;

  lin.Q.setZero();
  lin.Q.block<3, 3>(nv, nv) = I * noise.sigma_v * noise.sigma_v * std::pow(dt, noise.q_v_dt_exponent);
  lin.Q.block<3, 3>(nth, nth) =
      I * noise.sigma_theta * noise.sigma_theta * std::pow(dt, noise.q_theta_dt_exponent);
  lin.Q.block<3, 3>(na, na) = I * noise.sigma_a * noise.sigma_a / dt;
  lin.Q.block<3, 3>(nw, nw) = I * noise.sigma_w * noise.sigma_w / dt;
  lin.Q.block<3, 3>(nba, nba) = I * noise.sigma_ba * noise.sigma_ba * dt;
  lin.Q.block<3, 3>(nbw, nbw) = I * noise.sigma_bw * noise.sigma_bw * dt;
  return lin;
}

EkfState propagate(const EkfState& state, const ImuSample& imu, double dt,
                   const NoiseParams& noise) {
  if (!(dt > 0.0) || !std::isfinite(dt) || !imu.accel.allFinite() || !imu.gyro.allFinite()) {
    spdlog::warn("propagate: rejected IMU sample at t={} (dt={})", imu.timestamp, dt);
    return state;
  }
  const StrapdownLinearization lin = linearize_strapdown(state, imu.accel, imu.gyro, dt, noise);
  EkfState s = strapdown(state, imu.accel, imu.gyro, dt);
  s.P = lin.F * state.P * lin.F.transpose() + lin.N * lin.Q * lin.N.transpose();
  return s;
}

UpdateResult kalman_update(const EkfState& state, const Eigen::VectorXd& r,
                           const Eigen::MatrixXd& H, const Eigen::MatrixXd& R,
                           const UpdateOptions& options) {
  UpdateResult out{state, UpdateStatus::applied, 0.0};
  const Eigen::MatrixXd PHt = state.P * H.transpose();
  const Eigen::MatrixXd S = H * PHt + R;
  const Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success || !S.allFinite()) {
    spdlog::warn("kalman_update: innovation covariance not invertible, update skipped");
    out.status = UpdateStatus::singular;
    return out;
  }
  out.nis = r.dot(llt.solve(r));
  if (options.gate) {
    const boost::math::chi_squared chi2(static_cast<double>(r.size()));
    const double limit = boost::math::quantile(chi2, options.gate_probability);
    if (!(out.nis <= limit)) {
      out.status = UpdateStatus::gated;
      return out;
    }
  }

  // K = P H^T S^-1
  const Eigen::MatrixXd K = llt.solve(PHt.transpose()).transpose();
  const Vec15 dx = K * r;
  const Mat15 L = Mat15::Identity() - K * H;

  EkfState& s = out.state;
  s.p += dx.segment<3>(idx::p);
  s.v += dx.segment<3>(idx::v);
  s.b_a += dx.segment<3>(idx::ba);
  s.b_w += dx.segment<3>(idx::bw);
  const Vec3 dtheta = dx.segment<3>(idx::dtheta);
  s.dtheta += dtheta;
  s.P = L * state.P * L.transpose() + K * R * K.transpose();
  s.P = 0.5 * (s.P + s.P.transpose()).eval();
  if (!dtheta.isZero(0.0)) {
    s = error_state_reset(s);
  }
  return out;
}

EkfState error_state_reset(const EkfState& state) {
  EkfState s = state;
  if (state.dtheta.isZero(0.0)) return s;
  const UnitQuaternion dq = quat_exp(0.5 * state.dtheta);
  s.q = dq * state.q;
  Mat15 G = Mat15::Identity();
  G.block<3, 3>(idx::dtheta, idx::dtheta) = quat_to_rotmat(dq);
  s.P = G * state.P * G.transpose();
  s.dtheta.setZero();
  return s;
}

Observation egovel_observation(const EkfState& state, const EgovelEstimate& est) {
  const Mat3 Cwb = quat_to_rotmat(state.q).transpose();
  Observation obs;
  obs.r = est.v_body - Cwb * state.v;
  obs.H = Eigen::MatrixXd::Zero(3, kStateDim);
  obs.H.block<3, 3>(0, idx::v) = Cwb;
  obs.H.block<3, 3>(0, idx::dtheta) = Cwb * skew(state.v);
  obs.R = est.cov;
  return obs;
}

UpdateResult egovel_update(const EkfState& state, const EgovelEstimate& est,
                           const UpdateOptions& options) {
  const Observation obs = egovel_observation(state, est);
  return kalman_update(state, obs.r, obs.H, obs.R, options);
}

Eigen::Matrix<double, 3, 6> scanmatch_constraint() {
  Eigen::Matrix<double, 3, 6> Hc = Eigen::Matrix<double, 3, 6>::Zero();
  Hc(0, 0) = 1.0;
  Hc(1, 1) = 1.0;
  Hc(2, 5) = 1.0;
  return Hc;
}

Mat6 default_scanmatch_covariance(double sigma_xy, double sigma_yaw) {
  Vec6 d;
  d << sigma_xy, sigma_xy, sigma_xy, sigma_yaw, sigma_yaw, sigma_yaw;
  return d.cwiseAbs2().asDiagonal();
}

std::optional<Observation> scanmatch_observation(const EkfState& state, const PoseSE3& keyframe_pose,
                                                 const PoseSE3& matched_pose, const Mat6& R) {
  const PoseSE3 predicted = pose_relative(keyframe_pose, state.pose());
  // Residual expressed in the keyframe frame, consistent with H = C_w^k.
  const Vec3 dp = matched_pose.t - predicted.t;
  const UnitQuaternion dq = matched_pose.q * predicted.q.conjugate();
  if (std::abs(dq.w()) <= 0.1) return std::nullopt;

  Observation obs;
  obs.r.resize(6);
  obs.r << dp, 2.0 / dq.w() * dq.vec();
  const Mat3 Cwk = quat_to_rotmat(keyframe_pose.q).transpose();
  obs.H = Eigen::MatrixXd::Zero(6, kStateDim);
  obs.H.block<3, 3>(0, idx::p) = Cwk;
  obs.H.block<3, 3>(3, idx::dtheta) = Cwk;
  obs.R = R;
  return obs;
}

UpdateResult scanmatch_update(const EkfState& state, const PoseSE3& keyframe_pose,
                              const PoseSE3& matched_pose, const Mat6& R,
                              const UpdateOptions& options) {
  const auto obs = scanmatch_observation(state, keyframe_pose, matched_pose, R);
  if (!obs) {
    return {state, UpdateStatus::rejected, 0.0};
  }
  const Eigen::Matrix<double, 3, 6> Hc = scanmatch_constraint();
  return kalman_update(state, Hc * obs->r, Hc * obs->H, Hc * obs->R * Hc.transpose(), options);
}

}  // namespace grio
