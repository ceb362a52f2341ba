#include "grio/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>

namespace grio {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(fmt::format("{}: expected a number, got '{}'", key, s));
}

long long parse_int(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(fmt::format("{}: expected an integer, got '{}'", key, s));
  }
  return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(fmt::format("{}: expected a boolean, got '{}'", key, s));
}

std::vector<double> parse_list(std::string_view key, std::string_view text) {
  std::vector<double> out;
  std::string item;
  std::istringstream ss{std::string(text)};
  while (std::getline(ss, item, ',')) {
    if (!trim(item).empty()) out.push_back(parse_double(key, item));
  }
  return out;
}

std::string fmt_double(double v) { return fmt::format("{:.9g}", v); }

struct Entry {
  ConfigKey key;
  std::function<void(Config&, std::string_view)> set;
  std::function<std::string(const Config&)> get;
};

template <class Access>
Entry real(std::string name, std::string help, Access access, double scale = 1.0) {
  return {{name, std::move(help)},
          [name, access, scale](Config& c, std::string_view v) {
            access(c) = parse_double(name, v) * scale;
          },
          [access, scale](const Config& c) {
            return fmt_double(access(c) / scale);
          }};
}

template <class Access>
Entry integer(std::string name, std::string help, Access access) {
  return {{name, std::move(help)},
          [name, access](Config& c, std::string_view v) {
            using T = std::remove_reference_t<decltype(access(c))>;
            const long long x = parse_int(name, v);
            if constexpr (std::is_unsigned_v<T>) {
              if (x < 0) throw ConfigError(name + ": must be non-negative");
            }
            access(c) = static_cast<T>(x);
          },
          [access](const Config& c) { return std::to_string(access(c)); }};
}

template <class Access>
Entry boolean(std::string name, std::string help, Access access) {
  return {{name, std::move(help)},
          [name, access](Config& c, std::string_view v) { access(c) = parse_bool(name, v); },
          [access](const Config& c) {
            return std::string(access(c) ? "true" : "false");
          }};
}

template <class Access>
Entry text(std::string name, std::string help, Access access) {
  return {{name, std::move(help)},
          [access](Config& c, std::string_view v) { access(c) = trim(v); },
          [access](const Config& c) { return access(c); }};
}

#define GRIO_FIELD(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = [] {
    std::vector<Entry> t;
    // Filter noise.
    t.push_back(real("sigma_v", "velocity process noise std-dev per step", GRIO_FIELD(noise.sigma_v)));
    t.push_back(real("sigma_theta", "attitude process noise std-dev per step", GRIO_FIELD(noise.sigma_theta)));
    t.push_back(real("sigma_a", "accelerometer white noise density, m/s^2/sqrt(Hz)", GRIO_FIELD(noise.sigma_a)));
    t.push_back(real("sigma_w", "gyroscope white noise density, rad/s/sqrt(Hz)", GRIO_FIELD(noise.sigma_w)));
    t.push_back(real("sigma_ba", "accelerometer bias random walk, m/s^3/sqrt(Hz)", GRIO_FIELD(noise.sigma_ba)));
    t.push_back(real("sigma_bw", "gyroscope bias random walk, rad/s^2/sqrt(Hz)", GRIO_FIELD(noise.sigma_bw)));
    t.push_back(real("eta_ba", "initial accelerometer bias std-dev", GRIO_FIELD(noise.eta_ba)));
    t.push_back(real("eta_bw", "initial gyroscope bias std-dev", GRIO_FIELD(noise.eta_bw)));
    t.push_back(real("eta_theta", "initial roll/pitch std-dev, rad", GRIO_FIELD(noise.eta_theta)));
    t.push_back(real("q_v_dt_exponent", "Q_vv = sigma_v^2 * dt^e", GRIO_FIELD(noise.q_v_dt_exponent)));
    t.push_back(real("q_theta_dt_exponent", "Q_thth = sigma_theta^2 * dt^e", GRIO_FIELD(noise.q_theta_dt_exponent)));
    // Gaussian modelling.
    t.push_back(integer("n_gaussians", "Gaussians per keyframe, 0 = automatic", GRIO_FIELD(n_gaussians)));
    t.push_back(integer("points_per_gaussian", "automatic count divisor", GRIO_FIELD(points_per_gaussian)));
    t.push_back(integer("max_gaussians", "automatic count cap", GRIO_FIELD(max_gaussians)));
    t.push_back(real("s_min", "minimum log-scale", GRIO_FIELD(s_min)));
    t.push_back(real("s_disc", "log-size prior for the thinnest axis", GRIO_FIELD(s_disc)));
    t.push_back(integer("fit_epochs", "Gaussian fitting epoch budget", GRIO_FIELD(fit.epochs)));
    t.push_back(real("fit_lr_mu", "fitting step size for centres", GRIO_FIELD(fit.lr_mu)));
    t.push_back(real("fit_lr_scale", "fitting step size for log-scales", GRIO_FIELD(fit.lr_scale)));
    t.push_back(real("fit_lr_rot", "fitting step size for rotations", GRIO_FIELD(fit.lr_rot)));
    t.push_back(real("fit_lr_final", "final step-size fraction (cosine schedule)", GRIO_FIELD(fit.schedule.final_fraction)));
    t.push_back(real("fit_early_stop_tol", "early stop loss improvement", GRIO_FIELD(fit.early_stop_tol)));
    t.push_back(integer("fit_early_stop_window", "early stop window, epochs", GRIO_FIELD(fit.early_stop_window)));
    t.push_back(real("fit_gradient_tol", "stop when every gradient entry is below this", GRIO_FIELD(fit.gradient_tol)));
    t.push_back(integer("min_keyframe_points", "minimum inliers to create a keyframe", GRIO_FIELD(min_keyframe_points)));
    // Scan matching.
    t.push_back(integer("n_hypotheses", "pose hypotheses per registration", GRIO_FIELD(match.n_hypotheses)));
    t.push_back(real("mahal_clamp", "Mahalanobis distance clamp", GRIO_FIELD(match.mahal_clamp)));
    t.push_back(integer("downsample_target", "points kept per registration", GRIO_FIELD(match.downsample_target)));
    t.push_back(real("disp_x", "hypothesis std-dev x, m", GRIO_FIELD(match.dispersion[0])));
    t.push_back(real("disp_y", "hypothesis std-dev y, m", GRIO_FIELD(match.dispersion[1])));
    t.push_back(real("disp_z", "hypothesis std-dev z, m", GRIO_FIELD(match.dispersion[2])));
    t.push_back(real("disp_roll_deg", "hypothesis std-dev roll, deg", GRIO_FIELD(match.dispersion[3]), kDegToRad));
    t.push_back(real("disp_pitch_deg", "hypothesis std-dev pitch, deg", GRIO_FIELD(match.dispersion[4]), kDegToRad));
    t.push_back(real("disp_yaw_deg", "hypothesis std-dev yaw, deg", GRIO_FIELD(match.dispersion[5]), kDegToRad));
    t.push_back(integer("match_epochs", "registration epochs", GRIO_FIELD(match.epochs)));
    t.push_back(real("match_lr_trans", "registration step size, m", GRIO_FIELD(match.lr_translation)));
    t.push_back(real("match_lr_rot", "registration step size, rad", GRIO_FIELD(match.lr_rotation)));
    t.push_back(real("match_lr_final", "final step-size fraction (cosine schedule)", GRIO_FIELD(match.schedule.final_fraction)));
    t.push_back(real("kf_dist_max", "keyframe distance threshold, m", GRIO_FIELD(keyframe.kf_dist_max)));
    t.push_back(real("kf_angle_max_deg", "keyframe rotation threshold, deg", GRIO_FIELD(keyframe.kf_angle_max), kDegToRad));
    // Egovelocity.
    t.push_back(integer("ransac_iterations", "RANSAC iterations", GRIO_FIELD(ransac.iterations)));
    t.push_back(real("ransac_threshold", "RANSAC inlier threshold, m/s", GRIO_FIELD(ransac.threshold)));
    t.push_back(real("egovel_cov_floor", "added to the egovelocity covariance diagonal", GRIO_FIELD(ransac.cov_floor)));
    t.push_back(real("doppler_sign", "+1 if positive Doppler means receding, else -1", GRIO_FIELD(doppler_sign)));
    // Filter updates.
    t.push_back(real("sm_sigma_xy", "scan-match observation std-dev x/y, m", GRIO_FIELD(sm_sigma_xy)));
    t.push_back(real("sm_sigma_yaw_deg", "scan-match observation std-dev yaw, deg", GRIO_FIELD(sm_sigma_yaw_deg)));
    t.push_back(boolean("gate", "chi-square innovation gating", GRIO_FIELD(gate.gate)));
    t.push_back(real("gate_probability", "chi-square gate quantile", GRIO_FIELD(gate.gate_probability)));
    t.push_back(boolean("use_egovel", "apply egovelocity updates", GRIO_FIELD(use_egovel)));
    t.push_back(boolean("use_scan_match", "apply scan-match updates", GRIO_FIELD(use_scan_match)));
    t.push_back(integer("seed", "random seed", GRIO_FIELD(seed)));
    // Evaluation.
    t.push_back({{"eval_lengths", "sub-trajectory lengths, m (comma separated)"},
                 [](Config& c, std::string_view v) {
                   c.eval_lengths = parse_list("eval_lengths", v);
                   if (c.eval_lengths.empty()) throw ConfigError("eval_lengths: empty list");
                 },
                 [](const Config& c) {
                   std::string s;
                   for (std::size_t i = 0; i < c.eval_lengths.size(); ++i) {
                     s += (i ? "," : "") + fmt_double(c.eval_lengths[i]);
                   }
                   return s;
                 }});
    t.push_back(real("eval_max_gap", "time association tolerance, s", GRIO_FIELD(eval_max_gap)));
    // Synthetic data.
    t.push_back(text("synth_scene", "corridor | room", GRIO_FIELD(synth.scene)));
    t.push_back(text("synth_trajectory", "stationary | straight | loop", GRIO_FIELD(synth.trajectory)));
    t.push_back(real("synth_speed", "cruise speed, m/s", GRIO_FIELD(synth.speed)));
    t.push_back(real("synth_duration", "duration, s", GRIO_FIELD(synth.duration)));
    t.push_back(real("synth_ramp_time", "acceleration ramp, s", GRIO_FIELD(synth.ramp_time)));
    t.push_back(real("synth_loop_radius", "loop radius, m", GRIO_FIELD(synth.loop_radius)));
    t.push_back(real("synth_imu_rate", "IMU rate, Hz", GRIO_FIELD(synth.imu_rate)));
    t.push_back(real("synth_radar_rate", "radar rate, Hz", GRIO_FIELD(synth.radar_rate)));
    t.push_back(real("synth_scene_spacing", "scene surface sampling, m", GRIO_FIELD(synth.scene_spacing)));
    t.push_back(real("synth_range_max", "radar range, m", GRIO_FIELD(synth.range_max)));
    t.push_back(real("synth_fov_azimuth_deg", "radar half field of view, azimuth", GRIO_FIELD(synth.fov_azimuth_deg)));
    t.push_back(real("synth_fov_elevation_deg", "radar half field of view, elevation", GRIO_FIELD(synth.fov_elevation_deg)));
    t.push_back(integer("synth_points_per_scan", "returns per scan", GRIO_FIELD(synth.points_per_scan)));
    t.push_back(real("synth_radar_sigma", "point position noise, m", GRIO_FIELD(synth.radar_sigma)));
    t.push_back(real("synth_doppler_sigma", "Doppler noise, m/s", GRIO_FIELD(synth.doppler_sigma)));
    t.push_back(real("synth_outlier_fraction", "fraction of dynamic returns", GRIO_FIELD(synth.outlier_fraction)));
    t.push_back(real("synth_outlier_doppler", "Doppler offset of dynamic returns, m/s", GRIO_FIELD(synth.outlier_doppler)));
    t.push_back(real("synth_sigma_a", "simulated accelerometer noise density", GRIO_FIELD(synth.sigma_a)));
    t.push_back(real("synth_sigma_w", "simulated gyroscope noise density", GRIO_FIELD(synth.sigma_w)));
    t.push_back(real("synth_sigma_ba", "simulated accelerometer bias walk", GRIO_FIELD(synth.sigma_ba)));
    t.push_back(real("synth_sigma_bw", "simulated gyroscope bias walk", GRIO_FIELD(synth.sigma_bw)));
    t.push_back(real("synth_bias_a", "initial accelerometer bias std-dev", GRIO_FIELD(synth.bias_a)));
    t.push_back(real("synth_bias_w", "initial gyroscope bias std-dev", GRIO_FIELD(synth.bias_w)));
    return t;
  }();
  return table;
}

#undef GRIO_FIELD

const Entry& find_entry(std::string_view key) {
  for (const Entry& e : entries()) {
    if (e.key.name == key) return e;
  }
  throw ConfigError(fmt::format("unknown configuration key '{}'", key));
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const Entry& e : entries()) k.push_back(e.key);
    return k;
  }();
  return keys;
}

void set_config_value(Config& cfg, std::string_view key, std::string_view value) {
  find_entry(key).set(cfg, value);
}

std::string get_config_value(const Config& cfg, std::string_view key) {
  return find_entry(key).get(cfg);
}

void apply_config_text(Config& cfg, std::string_view text, std::string_view source) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value'", source, line_no));
    }
    try {
      set_config_value(cfg, trim(std::string_view(line).substr(0, eq)),
                       std::string_view(line).substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}:{}: {}", source, line_no, e.what()));
    }
  }
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  Config cfg;
  apply_config_text(cfg, ss.str(), path.string());
  validate_config(cfg);
  return cfg;
}

void validate_config(const Config& cfg) {
  auto require = [](bool ok, std::string_view key, std::string_view rule) {
    if (!ok) throw ConfigError(fmt::format("{}: must be {}", key, rule));
  };
  const NoiseParams& n = cfg.noise;
  for (const auto& [key, value] :
       {std::pair{"sigma_v", n.sigma_v}, {"sigma_theta", n.sigma_theta}, {"sigma_a", n.sigma_a},
        {"sigma_w", n.sigma_w}, {"sigma_ba", n.sigma_ba}, {"sigma_bw", n.sigma_bw},
        {"eta_ba", n.eta_ba}, {"eta_bw", n.eta_bw}, {"eta_theta", n.eta_theta}}) {
    require(value >= 0.0, key, "non-negative");
  }
  require(cfg.n_gaussians >= 0, "n_gaussians", "non-negative (0 = automatic)");
  require(cfg.points_per_gaussian >= 1, "points_per_gaussian", "at least 1");
  require(cfg.max_gaussians >= 1, "max_gaussians", "at least 1");
  require(cfg.fit.epochs >= 1, "fit_epochs", "at least 1");
  require(cfg.min_keyframe_points >= 1, "min_keyframe_points", "at least 1");
  require(cfg.match.n_hypotheses >= 1, "n_hypotheses", "at least 1");
  require(cfg.match.mahal_clamp > 0.0, "mahal_clamp", "positive");
  require(cfg.match.epochs >= 0, "match_epochs", "non-negative");
  require((cfg.match.dispersion.array() >= 0.0).all(), "disp_*", "non-negative");
  require(cfg.keyframe.kf_dist_max > 0.0, "kf_dist_max", "positive");
  require(cfg.keyframe.kf_angle_max > 0.0, "kf_angle_max_deg", "positive");
  require(cfg.ransac.iterations >= 1, "ransac_iterations", "at least 1");
  require(cfg.ransac.threshold > 0.0, "ransac_threshold", "positive");
  require(cfg.ransac.cov_floor >= 0.0, "egovel_cov_floor", "non-negative");
  require(cfg.doppler_sign == 1.0 || cfg.doppler_sign == -1.0, "doppler_sign", "1 or -1");
  require(cfg.sm_sigma_xy > 0.0, "sm_sigma_xy", "positive");
  require(cfg.sm_sigma_yaw_deg > 0.0, "sm_sigma_yaw_deg", "positive");
  require(cfg.gate.gate_probability > 0.0 && cfg.gate.gate_probability < 1.0, "gate_probability",
          "in (0, 1)");
  require(!cfg.eval_lengths.empty(), "eval_lengths", "a non-empty list");
  for (double l : cfg.eval_lengths) require(l > 0.0, "eval_lengths", "positive");
  require(cfg.eval_max_gap > 0.0, "eval_max_gap", "positive");
}

std::string dump_config(const Config& cfg) {
  std::string out;
  for (const Entry& e : entries()) {
    out += fmt::format("{} = {}  # {}\n", e.key.name, e.get(cfg), e.key.help);
  }
  return out;
}

}  // namespace grio
