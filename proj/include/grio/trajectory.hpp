#pragma once

#include <filesystem>
#include <vector>

#include "grio/geom.hpp"

namespace grio {

struct StampedPose {
  double timestamp = 0.0;
  PoseSE3 pose;
};

/// Poses in ascending time order.
using Trajectory = std::vector<StampedPose>;

/// One line per pose: `timestamp tx ty tz qx qy qz qw`; the timestamp is
/// printed with 9 decimals and every other value with 9 significant digits.
void write_trajectory(const Trajectory& traj, const std::filesystem::path& path);
Trajectory read_trajectory(const std::filesystem::path& path);

/// Single formatted line without the trailing newline.
std::string format_pose_line(const StampedPose& pose);

}  // namespace grio
