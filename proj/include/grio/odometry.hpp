#pragma once

#include <cstddef>
#include <vector>

#include "grio/config.hpp"
#include "grio/dataset.hpp"
#include "grio/trajectory.hpp"

namespace grio {

struct Keyframe {
  double timestamp = 0.0;
  PoseSE3 pose;
  GaussianModel model;
};

struct OdometryStats {
  std::size_t scans = 0;
  std::size_t skipped_empty = 0;
  std::size_t egovel_failures = 0;
  std::size_t egovel_updates = 0;
  std::size_t egovel_gated = 0;
  std::size_t scanmatch_updates = 0;
  std::size_t scanmatch_gated = 0;
  std::size_t scanmatch_rejected = 0;
  std::size_t keyframes = 0;
};

struct OdometryResult {
  /// One pose per processed radar scan.
  Trajectory trajectory;
  /// Timestamp and pose of every keyframe, in creation order.
  std::vector<StampedPose> keyframes;
  OdometryStats stats;
};

/// Fits a Gaussian model to a cloud with the configured count rule and fit
/// options.
GaussianModel fit_keyframe_model(std::span<const Vec3> cloud, const Config& cfg, std::uint64_t seed);

/// IMU-rate propagation; per radar scan: egovelocity update, registration of
/// the inlier cloud against the current keyframe, constrained pose update and
/// keyframe promotion.
OdometryResult run_odometry(const Dataset& dataset, const Config& cfg);

}  // namespace grio
