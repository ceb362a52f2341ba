#include "grio/trajectory.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace grio {

std::string format_pose_line(const StampedPose& sp) {
  const PoseSE3& p = sp.pose;
  return fmt::format("{:.9f} {:.9g} {:.9g} {:.9g} {:.9g} {:.9g} {:.9g} {:.9g}", sp.timestamp,
                     p.t.x(), p.t.y(), p.t.z(), p.q.x(), p.q.y(), p.q.z(), p.q.w());
}

void write_trajectory(const Trajectory& traj, const std::filesystem::path& path) {
  if (traj.empty()) spdlog::warn("write_trajectory: empty trajectory written to {}", path.string());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const StampedPose& sp : traj) out << format_pose_line(sp) << '\n';
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Trajectory read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trajectory " + path.string());
  Trajectory traj;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    double t, x, y, z, qx, qy, qz, qw;
    if (!(ss >> t >> x >> y >> z >> qx >> qy >> qz >> qw)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 'timestamp tx ty tz qx qy qz qw'");
    }
    if (!traj.empty() && !(t > traj.back().timestamp)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": timestamps must be strictly increasing");
    }
    traj.push_back({t, {Vec3(x, y, z), UnitQuaternion(qw, qx, qy, qz)}});
  }
  return traj;
}

}  // namespace grio
