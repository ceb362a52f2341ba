#include "grio/odometry.hpp"

#include <cmath>
#include <optional>

#include <spdlog/spdlog.h>

#include "grio/ekf.hpp"
#include "grio/scan_match.hpp"

namespace grio {

GaussianModel fit_keyframe_model(std::span<const Vec3> cloud, const Config& cfg,
                                 std::uint64_t seed) {
  const int n = cfg.n_gaussians > 0
                    ? cfg.n_gaussians
                    : default_gaussian_count(cloud.size(), cfg.points_per_gaussian, cfg.max_gaussians);
  GaussianModel model = init_model(cloud, n, cfg.s_min, cfg.s_disc, seed);
  return fit_model(std::move(model), cloud, cfg.fit).model;
}

OdometryResult run_odometry(const Dataset& dataset, const Config& cfg) {
  OdometryResult result;
  OdometryStats& stats = result.stats;
  const Mat6 sm_cov = default_scanmatch_covariance(cfg.sm_sigma_xy, cfg.sm_sigma_yaw_deg * kDegToRad);

  EkfState state = init_filter(cfg.noise);
  std::optional<Keyframe> keyframe;

  const auto& imu = dataset.imu;
  std::size_t next_imu = 0;
  std::optional<ImuSample> last_imu;

  // Propagate with the held previous sample up to `sample`.
  auto consume = [&](const ImuSample& sample) {
    if (last_imu) {
      state = propagate(state, *last_imu, sample.timestamp - last_imu->timestamp, cfg.noise);
    }
    last_imu = sample;
  };

  for (std::size_t scan_index = 0; scan_index < dataset.scans.size(); ++scan_index) {
    const RadarScan& scan = dataset.scans[scan_index];
    if (scan.points.empty()) {
      ++stats.skipped_empty;
      continue;
    }
    ++stats.scans;

    // Advance to the propagated timestamp nearest to the scan.
    while (next_imu < imu.size()) {
      const double t_next = imu[next_imu].timestamp;
      const bool take = t_next <= scan.timestamp ||
                        (last_imu && t_next - scan.timestamp < scan.timestamp - last_imu->timestamp);
      if (!take) break;
      consume(imu[next_imu++]);
    }

    const std::uint64_t scan_seed = cfg.seed * 1000003ULL + scan_index;
    const RadarScan body_scan = rotate_scan(scan, dataset.radar_to_body);
    RansacConfig ransac = cfg.ransac;
    ransac.seed = scan_seed;
    const auto egovel = estimate_egovelocity(body_scan, ransac);
    if (!egovel) {
      ++stats.egovel_failures;
      result.trajectory.push_back({scan.timestamp, state.pose()});
      continue;
    }
    if (cfg.use_egovel) {
      const UpdateResult up = egovel_update(state, *egovel, cfg.gate);
      state = up.state;
      if (up.status == UpdateStatus::applied) {
        ++stats.egovel_updates;
      } else {
        ++stats.egovel_gated;
      }
    }

    const std::vector<Vec3> inliers = select_points(body_scan, egovel->inlier_mask);
    const bool enough_points = static_cast<int>(inliers.size()) >= cfg.min_keyframe_points;

    if (keyframe && cfg.use_scan_match && !inliers.empty()) {
      MatchConfig match = cfg.match;
      match.seed = scan_seed;
      const PoseSE3 predicted = pose_relative(keyframe->pose, state.pose());
      const RegistrationResult reg = register_scan(keyframe->model, inliers, predicted, match);
      const UpdateResult up = scanmatch_update(state, keyframe->pose, reg.best, sm_cov, cfg.gate);
      state = up.state;
      switch (up.status) {
        case UpdateStatus::applied:
          ++stats.scanmatch_updates;
          break;
        case UpdateStatus::rejected:
          ++stats.scanmatch_rejected;
          break;
        default:
          ++stats.scanmatch_gated;
      }
    }

    if (enough_points && (!keyframe || keyframe_due(keyframe->pose, state.pose(), cfg.keyframe))) {
      try {
        keyframe = Keyframe{scan.timestamp, state.pose(), fit_keyframe_model(inliers, cfg, scan_seed)};
        result.keyframes.push_back({scan.timestamp, state.pose()});
        ++stats.keyframes;
      } catch (const ModelError& e) {
        spdlog::warn("scan {}: keyframe model rejected: {}", scan_index, e.what());
      }
    }

    result.trajectory.push_back({scan.timestamp, state.pose()});
  }
  return result;
}

}  // namespace grio
