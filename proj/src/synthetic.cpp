#include "grio/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace grio {

namespace {

// Rectangle spanned by origin + [0, a] * u + [0, b] * v, sampled on a grid.
void add_patch(std::vector<Vec3>& out, const Vec3& origin, const Vec3& u, double a, const Vec3& v,
               double b, double spacing) {
  const int nu = std::max(1, static_cast<int>(std::round(a / spacing)));
  const int nv = std::max(1, static_cast<int>(std::round(b / spacing)));
  for (int i = 0; i <= nu; ++i) {
    for (int j = 0; j <= nv; ++j) {
      out.push_back(origin + (a * i / nu) * u + (b * j / nv) * v);
    }
  }
}

void add_box(std::vector<Vec3>& out, const Vec3& lo, const Vec3& size, double spacing) {
  const Vec3 ex = Vec3::UnitX(), ey = Vec3::UnitY(), ez = Vec3::UnitZ();
  add_patch(out, lo, ex, size.x(), ez, size.z(), spacing);
  add_patch(out, lo + Vec3(0, size.y(), 0), ex, size.x(), ez, size.z(), spacing);
  add_patch(out, lo, ey, size.y(), ez, size.z(), spacing);
  add_patch(out, lo + Vec3(size.x(), 0, 0), ey, size.y(), ez, size.z(), spacing);
  add_patch(out, lo + Vec3(0, 0, size.z()), ex, size.x(), ey, size.y(), spacing);
}

constexpr double kFloor = -1.0;
constexpr double kCeiling = 2.5;

}  // namespace

SyntheticMotion::SyntheticMotion(const SynthSpec& spec) : spec_(spec) {
  if (spec.trajectory != "stationary" && spec.trajectory != "straight" && spec.trajectory != "loop") {
    throw std::invalid_argument("unknown synthetic trajectory '" + spec.trajectory + "'");
  }
}

double SyntheticMotion::arc_length(double t) const {
  if (spec_.trajectory == "stationary" || t <= 0.0) return 0.0;
  const double V = spec_.speed;
  const double T = spec_.ramp_time;
  if (T <= 0.0) return V * t;
  if (t < T) {
    const double u = t / T;
    return V * T * (u * u * u - 0.5 * u * u * u * u);
  }
  return V * T * 0.5 + V * (t - T);
}

MotionSample SyntheticMotion::at(double t) const {
  MotionSample m;
  if (spec_.trajectory == "stationary") return m;

  // Speed profile: smoothstep ramp from rest, then constant.
  const double V = spec_.speed;
  const double T = spec_.ramp_time;
  double speed = V, accel = 0.0;
  if (t <= 0.0) {
    speed = T > 0.0 ? 0.0 : V;
  } else if (T > 0.0 && t < T) {
    const double u = t / T;
    speed = V * (3.0 * u * u - 2.0 * u * u * u);
    accel = V / T * (6.0 * u - 6.0 * u * u);
  }
  const double s = arc_length(t);

  if (spec_.trajectory == "straight") {
    m.position = Vec3(s, 0.0, 0.0);
    m.velocity = Vec3(speed, 0.0, 0.0);
    m.acceleration = Vec3(accel, 0.0, 0.0);
    return m;
  }

  // Counter-clockwise circle through the origin, tangent to +x there.
  const double R = spec_.loop_radius;
  const double heading = s / R;
  const Vec3 tangent(std::cos(heading), std::sin(heading), 0.0);
  const Vec3 normal(-std::sin(heading), std::cos(heading), 0.0);
  m.position = Vec3(R * std::sin(heading), R * (1.0 - std::cos(heading)), 0.0);
  m.velocity = speed * tangent;
  m.acceleration = accel * tangent + (speed * speed / R) * normal;
  m.attitude = quat_exp(Vec3(0.0, 0.0, 0.5 * heading));
  m.angular_rate = Vec3(0.0, 0.0, speed / R);
  return m;
}

std::vector<Vec3> build_scene(const SynthSpec& spec) {
  const double h = spec.scene_spacing;
  const Vec3 ex = Vec3::UnitX(), ey = Vec3::UnitY(), ez = Vec3::UnitZ();
  const double height = kCeiling - kFloor;
  std::vector<Vec3> pts;

  if (spec.scene == "corridor") {
    // Corridor along +x, 4 m wide, with alcoves, pillars and crates so that
    // the along-track direction is constrained.
    const double x0 = -10.0;
    const double length = std::max(40.0, spec.speed * spec.duration + 30.0);
    for (double x = x0; x < x0 + length; x += 6.0) {
      add_patch(pts, Vec3(x, -2.0, kFloor), ex, 4.0, ez, height, h);
      add_patch(pts, Vec3(x + 1.0, 2.0, kFloor), ex, 4.0, ez, height, h);
      // Alcove back walls and side walls.
      add_patch(pts, Vec3(x + 4.0, -3.0, kFloor), ex, 2.0, ez, height, h);
      add_patch(pts, Vec3(x + 4.0, -3.0, kFloor), ey, 1.0, ez, height, h);
      add_patch(pts, Vec3(x + 6.0, -3.0, kFloor), ey, 1.0, ez, height, h);
      add_patch(pts, Vec3(x - 1.0, 3.0, kFloor), ex, 2.0, ez, height, h);
      add_patch(pts, Vec3(x - 1.0, 2.0, kFloor), ey, 1.0, ez, height, h);
      add_patch(pts, Vec3(x + 1.0, 2.0, kFloor), ey, 1.0, ez, height, h);
      add_box(pts, Vec3(x + 2.0, 1.2, kFloor), Vec3(0.5, 0.5, 1.0), h);
      add_box(pts, Vec3(x + 4.5, -2.9, kFloor), Vec3(0.6, 0.8, 1.4), h);
    }
    add_patch(pts, Vec3(x0, -2.0, kFloor), ey, 4.0, ez, height, h);
    add_patch(pts, Vec3(x0 + length, -2.0, kFloor), ey, 4.0, ez, height, h);
  } else if (spec.scene == "room") {
    // Square hall around the loop with scattered pillars and crates.
    const double half = spec.loop_radius + 8.0;
    const Vec3 c(0.0, spec.loop_radius, 0.0);
    const Vec3 lo = c + Vec3(-half, -half, kFloor);
    add_patch(pts, lo, ex, 2 * half, ez, height, h);
    add_patch(pts, lo + Vec3(0, 2 * half, 0), ex, 2 * half, ez, height, h);
    add_patch(pts, lo, ey, 2 * half, ez, height, h);
    add_patch(pts, lo + Vec3(2 * half, 0, 0), ey, 2 * half, ez, height, h);
    std::mt19937_64 layout(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int k = 0; k < 24; ++k) {
      const double ang = 2.0 * std::numbers::pi * k / 24.0 + 0.1 * unit(layout);
      const double r = spec.loop_radius + ((k % 2) ? 3.0 : -3.0) + unit(layout);
      const Vec3 base = c + Vec3(r * std::cos(ang), r * std::sin(ang), kFloor);
      const Vec3 size(0.4 + 0.8 * unit(layout), 0.4 + 0.8 * unit(layout), 0.8 + 2.0 * unit(layout));
      add_box(pts, base - 0.5 * Vec3(size.x(), size.y(), 0.0), size, h);
    }
  } else {
    throw std::invalid_argument("unknown synthetic scene '" + spec.scene + "'");
  }
  return pts;
}

SyntheticData generate_synthetic(const SynthSpec& spec, std::uint64_t seed) {
  if (!(spec.imu_rate > 0.0) || !(spec.radar_rate > 0.0) || !(spec.duration > 0.0)) {
    throw std::invalid_argument("synthetic rates and duration must be positive");
  }
  const SyntheticMotion motion(spec);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gauss3 = [&] { return Vec3(normal(rng), normal(rng), normal(rng)); };

  SyntheticData out;
  out.scene = build_scene(spec);
  Dataset& ds = out.dataset;

  // IMU: exact kinematics plus biases and discrete white noise.
  const double dt = 1.0 / spec.imu_rate;
  const auto n_imu = static_cast<std::size_t>(std::floor(spec.duration * spec.imu_rate)) + 1;
  Vec3 ba = spec.bias_a * gauss3();
  Vec3 bw = spec.bias_w * gauss3();
  const double sd_a = spec.sigma_a / std::sqrt(dt);
  const double sd_w = spec.sigma_w / std::sqrt(dt);
  const double walk_a = spec.sigma_ba * std::sqrt(dt);
  const double walk_w = spec.sigma_bw * std::sqrt(dt);
  ds.imu.reserve(n_imu);
  for (std::size_t i = 0; i < n_imu; ++i) {
    const double t = static_cast<double>(i) * dt;
    const MotionSample m = motion.at(t);
    ImuSample s;
    s.timestamp = t;
    s.accel = m.attitude.conjugate().rotate(m.acceleration - gravity()) + ba + sd_a * gauss3();
    s.gyro = m.angular_rate + bw + sd_w * gauss3();
    ds.imu.push_back(s);
    out.accel_bias.push_back(ba);
    out.gyro_bias.push_back(bw);
    ba += walk_a * gauss3();
    bw += walk_w * gauss3();
  }

  // Radar: random subset of the visible scene points, noisy positions and
  // Doppler, optional dynamic returns.
  const double tan_az = std::tan(spec.fov_azimuth_deg * kDegToRad);
  const double sin_el = std::sin(spec.fov_elevation_deg * kDegToRad);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ds.groundtruth.emplace();
  const double radar_dt = 1.0 / spec.radar_rate;
  std::vector<std::size_t> visible;
  const auto n_scans = static_cast<int>(std::floor(spec.duration * spec.radar_rate + 1e-9));
  for (int k = 1; k <= n_scans; ++k) {
    const double t = k * radar_dt;
    const MotionSample m = motion.at(t);
    const PoseSE3 body{m.position, m.attitude};
    const UnitQuaternion world_to_body = m.attitude.conjugate();
    const Vec3 v_body = world_to_body.rotate(m.velocity);
    const Mat3 body_to_radar = ds.radar_to_body.transpose();

    visible.clear();
    std::vector<Vec3> radar_pts(out.scene.size());
    for (std::size_t i = 0; i < out.scene.size(); ++i) {
      const Vec3 p = body_to_radar * world_to_body.rotate(out.scene[i] - m.position);
      const double r = p.norm();
      if (r < 0.5 || r > spec.range_max || p.x() <= 0.0) continue;
      if (std::abs(p.y()) > tan_az * p.x() || std::abs(p.z()) > sin_el * r) continue;
      radar_pts[i] = p;
      visible.push_back(i);
    }
    const std::size_t keep =
        std::min(visible.size(), static_cast<std::size_t>(std::max(spec.points_per_scan, 0)));
    for (std::size_t i = 0; i < keep; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, visible.size() - 1);
      std::swap(visible[i], visible[pick(rng)]);
    }
    visible.resize(keep);
    std::sort(visible.begin(), visible.end());

    RadarScan scan;
    scan.timestamp = t;
    const Vec3 v_radar = body_to_radar * v_body;
    for (std::size_t i : visible) {
      const Vec3& p = radar_pts[i];
      RadarPoint rp;
      rp.position = p + spec.radar_sigma * gauss3();
      rp.doppler = -p.normalized().dot(v_radar) + spec.doppler_sigma * normal(rng);
      if (unit(rng) < spec.outlier_fraction) rp.doppler += spec.outlier_doppler;
      rp.intensity = 1.0 / (1.0 + 0.05 * p.norm());
      scan.points.push_back(rp);
    }
    ds.scans.push_back(std::move(scan));
    ds.groundtruth->push_back({t, body});
  }
  return out;
}

}  // namespace grio
