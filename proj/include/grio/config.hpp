#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "grio/ekf.hpp"
#include "grio/egovel.hpp"
#include "grio/gaussian_model.hpp"
#include "grio/scan_match.hpp"

namespace grio {

/// Scene, motion and sensor-noise description for the synthetic generator.
struct SynthSpec {
  std::string scene = "corridor";      // corridor | room
  std::string trajectory = "straight";  // stationary | straight | loop
  double speed = 1.0;
  double duration = 21.0;
  double ramp_time = 2.0;
  double loop_radius = 8.0;
  double imu_rate = 200.0;
  double radar_rate = 10.0;
  double scene_spacing = 0.15;
  double range_max = 30.0;
  double fov_azimuth_deg = 60.0;
  double fov_elevation_deg = 20.0;
  int points_per_scan = 400;
  double radar_sigma = 0.05;
  double doppler_sigma = 0.05;
  double outlier_fraction = 0.0;
  double outlier_doppler = 3.0;
  double sigma_a = 0.0;
  double sigma_w = 0.0;
  double sigma_ba = 0.0;
  double sigma_bw = 0.0;
  double bias_a = 0.0;
  double bias_w = 0.0;
};

struct Config {
  NoiseParams noise{.sigma_v = 1e-3,
                    .sigma_theta = 1e-4,
                    .sigma_a = 0.02,
                    .sigma_w = 0.002,
                    .sigma_ba = 1e-3,
                    .sigma_bw = 1e-4,
                    .eta_ba = 0.05,
                    .eta_bw = 0.005,
                    .eta_theta = 0.02};

  /// 0 selects min(points / points_per_gaussian, max_gaussians).
  int n_gaussians = 0;
  int points_per_gaussian = 10;
  int max_gaussians = 150;
  double s_min = std::log(0.05);
  double s_disc = std::log(0.05);
  FitOptions fit;
  int min_keyframe_points = 20;

  MatchConfig match;
  KeyframeCriteria keyframe;
  RansacConfig ransac;
  double doppler_sign = 1.0;

  double sm_sigma_xy = 0.05;
  double sm_sigma_yaw_deg = 1.0;
  UpdateOptions gate;
  bool use_egovel = true;
  bool use_scan_match = true;

  std::uint64_t seed = 1;

  std::vector<double> eval_lengths{10.0, 20.0, 40.0, 80.0};
  double eval_max_gap = 0.05;

  SynthSpec synth;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigKey {
  std::string name;
  std::string help;
};

/// Every recognised key, in documentation order.
const std::vector<ConfigKey>& config_keys();

void set_config_value(Config& cfg, std::string_view key, std::string_view value);
std::string get_config_value(const Config& cfg, std::string_view key);

/// `key = value` lines; `#` starts a comment. Unknown keys are errors.
void apply_config_text(Config& cfg, std::string_view text, std::string_view source = "<text>");
Config load_config(const std::filesystem::path& path);

/// Checks ranges (positive counts and thresholds, non-negative noise
/// densities, doppler_sign of +-1). Throws ConfigError naming the key.
void validate_config(const Config& cfg);
/// Full configuration in the same `key = value` syntax.
std::string dump_config(const Config& cfg);

}  // namespace grio
