#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "grio/geom.hpp"

namespace grio {

struct RadarPoint {
  Vec3 position = Vec3::Zero();
  /// Radial speed in m/s, positive when the target recedes from the sensor.
  double doppler = 0.0;
  double intensity = 0.0;
};

struct RadarScan {
  double timestamp = 0.0;
  std::vector<RadarPoint> points;
  /// Set by the loader when the scan file carried no rows.
  bool empty_file = false;
};

struct EgovelEstimate {
  Vec3 v_body = Vec3::Zero();
  Mat3 cov = Mat3::Identity();
  std::vector<bool> inlier_mask;

  std::size_t inlier_count() const;
};

struct RansacConfig {
  int iterations = 100;
  /// Inlier threshold on |doppler residual|, m/s.
  double threshold = 0.15;
  double cov_floor = 1e-6;
  std::uint64_t seed = 0;
};

/// doppler + dir . v; zero for a static point seen from a sensor moving at v.
double doppler_residual(const Vec3& point_dir, double doppler, const Vec3& v);

/// RANSAC over 3-point minimal solves, then a least-squares refit on the
/// consensus set. Returns nullopt when fewer than 3 usable points exist or the
/// direction matrix is rank deficient.
std::optional<EgovelEstimate> estimate_egovelocity(const RadarScan& scan,
                                                   const RansacConfig& cfg = {});

/// Rotates positions into another frame (Doppler is frame independent).
RadarScan rotate_scan(const RadarScan& scan, const Mat3& rotation);

/// Positions of the points flagged in `mask`.
std::vector<Vec3> select_points(const RadarScan& scan, const std::vector<bool>& mask);

}  // namespace grio
