#pragma once

#include <optional>
#include <string_view>

#include <Eigen/Dense>

#include "grio/egovel.hpp"
#include "grio/geom.hpp"

namespace grio {

inline constexpr int kStateDim = 15;
inline constexpr int kNoiseDim = 18;

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat15 = Eigen::Matrix<double, kStateDim, kStateDim>;
using Vec15 = Eigen::Matrix<double, kStateDim, 1>;

/// Offsets of the error-state blocks inside P and x.
namespace idx {
inline constexpr int p = 0;
inline constexpr int v = 3;
inline constexpr int ba = 6;
inline constexpr int bw = 9;
inline constexpr int dtheta = 12;
}  // namespace idx

/// Gravity in the world frame (NWU, z up). Not part of the estimated state.
inline Vec3 gravity() { return {0.0, 0.0, -9.80511}; }

struct ImuSample {
  double timestamp = 0.0;
  Vec3 accel = Vec3::Zero();
  Vec3 gyro = Vec3::Zero();
};

/// Continuous-time IMU noise densities follow the Kalibr convention: white
/// noise in units/sqrt(Hz), random walk in units*sqrt(Hz).
struct NoiseParams {
  double sigma_v = 0.0;
  double sigma_theta = 0.0;
  double sigma_a = 0.0;
  double sigma_w = 0.0;
  double sigma_ba = 0.0;
  double sigma_bw = 0.0;
  double eta_ba = 0.0;
  double eta_bw = 0.0;
  double eta_theta = 0.0;
  /// Q_vv = sigma_v^2 * dt^q_v_dt_exponent, likewise for theta. 0 keeps the
  /// per-step variances as printed in the model.
  double q_v_dt_exponent = 0.0;
  double q_theta_dt_exponent = 0.0;
};

struct EkfState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 b_a = Vec3::Zero();
  Vec3 b_w = Vec3::Zero();
  Vec3 dtheta = Vec3::Zero();
  /// world <- body
  UnitQuaternion q;
  Mat15 P = Mat15::Zero();

  PoseSE3 pose() const { return {p, q}; }
};

struct StrapdownLinearization {
  Mat15 F;
  Eigen::Matrix<double, kStateDim, kNoiseDim> N;
  Eigen::Matrix<double, kNoiseDim, kNoiseDim> Q;
};

enum class UpdateStatus { applied, gated, singular, rejected };

std::string_view to_string(UpdateStatus status);

struct UpdateOptions {
  bool gate = true;
  double gate_probability = 0.999;
};

struct UpdateResult {
  EkfState state;
  UpdateStatus status = UpdateStatus::applied;
  /// Normalized innovation squared, r^T S^-1 r.
  double nis = 0.0;
};

EkfState init_filter(const NoiseParams& noise);

/// Nominal strapdown step only (no covariance).
EkfState strapdown(const EkfState& state, const Vec3& accel, const Vec3& gyro, double dt);

/// F, N and Q of the linearized strapdown step.
StrapdownLinearization linearize_strapdown(const EkfState& state, const Vec3& accel,
                                           const Vec3& gyro, double dt, const NoiseParams& noise);

/// Nominal propagation plus P <- F P F^T + N Q N^T. Samples with dt <= 0 or
/// non-finite readings are rejected and the state is returned unchanged.
EkfState propagate(const EkfState& state, const ImuSample& imu, double dt,
                   const NoiseParams& noise);

/// Joseph-form update. Applies error_state_reset when dtheta changed. No
/// gating unless `options.gate` is set.
UpdateResult kalman_update(const EkfState& state, const Eigen::VectorXd& r,
                           const Eigen::MatrixXd& H, const Eigen::MatrixXd& R,
                           const UpdateOptions& options = {.gate = false});

/// Folds dtheta into q and rotates the attitude block of P.
EkfState error_state_reset(const EkfState& state);

struct Observation {
  Eigen::VectorXd r;
  Eigen::MatrixXd H;
  Eigen::MatrixXd R;
};

/// Body-frame velocity observation: r = y - C_w^b v.
Observation egovel_observation(const EkfState& state, const EgovelEstimate& est);

UpdateResult egovel_update(const EkfState& state, const EgovelEstimate& est,
                           const UpdateOptions& options = {});

/// Selects x, y and yaw out of a 6-dof (x y z roll pitch yaw) residual.
Eigen::Matrix<double, 3, 6> scanmatch_constraint();

/// Default fixed scan-match covariance over (x y z roll pitch yaw).
Mat6 default_scanmatch_covariance(double sigma_xy = 0.05, double sigma_yaw = 1.0 * kDegToRad);

/// Unconstrained 6-dof residual and Jacobian of a keyframe-relative pose
/// observation, or nullopt when the rotation residual is too large for the
/// small-angle recovery (|dq_w| <= 0.1).
std::optional<Observation> scanmatch_observation(const EkfState& state, const PoseSE3& keyframe_pose,
                                                 const PoseSE3& matched_pose, const Mat6& R);

UpdateResult scanmatch_update(const EkfState& state, const PoseSE3& keyframe_pose,
                              const PoseSE3& matched_pose, const Mat6& R,
                              const UpdateOptions& options = {});

}  // namespace grio
