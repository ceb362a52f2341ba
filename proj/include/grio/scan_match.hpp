#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "grio/adam.hpp"
#include "grio/gaussian_model.hpp"
#include "grio/geom.hpp"

namespace grio {

struct PoseHypothesis {
  PoseSE3 pose;
  double loss = 0.0;
  bool frozen = false;
};

struct MatchConfig {
  int n_hypotheses = 16;
  /// Clamp on the per-point Mahalanobis distance.
  double mahal_clamp = 4.0;
  int downsample_target = 512;
  /// Sampling std-devs: x, y, z in metres; roll, pitch, yaw in radians.
  Vec6 dispersion =
      (Vec6() << 0.3, 0.3, 0.1, 0.5 * kDegToRad, 0.5 * kDegToRad, 2.0 * kDegToRad).finished();
  int epochs = 50;
  double lr_translation = 0.05;
  double lr_rotation = 0.01;
  StepSchedule schedule{0.05};
  std::uint64_t seed = 0;
};

struct KeyframeCriteria {
  double kf_dist_max = 2.0;
  double kf_angle_max = 10.0 * kDegToRad;
};

struct MatchLoss {
  double loss = 0.0;
  Vec3 grad_translation = Vec3::Zero();
  /// Gradient with respect to a left tangent increment q <- exp(d) * q.
  Vec3 grad_rotation = Vec3::Zero();
};

/// Inverse shape matrices of a model, cached for repeated matching.
struct MatchTarget {
  std::vector<Vec3> centers;
  std::vector<Mat3> inv_shapes;

  explicit MatchTarget(const GaussianModel& model);
};

/// K hypotheses around `center`; hypothesis 0 is `center` itself.
std::vector<PoseHypothesis> sample_hypotheses(const PoseSE3& center, const MatchConfig& cfg,
                                              std::uint64_t seed);

/// Mean clamped Mahalanobis distance of the cloud transformed by `pose`,
/// each point matched to its Mahalanobis-nearest Gaussian.
MatchLoss match_loss(const MatchTarget& target, std::span<const Vec3> cloud, const PoseSE3& pose,
                     double mahal_clamp);
MatchLoss match_loss(const GaussianModel& model, std::span<const Vec3> cloud, const PoseSE3& pose,
                     double mahal_clamp);

struct RegistrationResult {
  PoseSE3 best;
  double best_loss = 0.0;
  std::vector<PoseHypothesis> all;
};

/// Multi-hypothesis registration of `cloud` (scan frame) against `model`.
/// The returned poses map scan points into the model frame.
RegistrationResult register_scan(const GaussianModel& model, std::span<const Vec3> cloud,
                                 const PoseSE3& center, const MatchConfig& cfg);

/// True when the relative pose from `last_kf` to `current` reaches either the
/// distance or the rotation threshold (inclusive).
bool keyframe_due(const PoseSE3& last_kf, const PoseSE3& current, const KeyframeCriteria& crit);

}  // namespace grio
