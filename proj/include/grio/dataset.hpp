#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <vector>

#include "grio/egovel.hpp"
#include "grio/ekf.hpp"
#include "grio/trajectory.hpp"

namespace grio {

struct Dataset {
  std::vector<ImuSample> imu;
  std::vector<RadarScan> scans;
  /// C_r^b: radar frame to body frame.
  Mat3 radar_to_body = Mat3::Identity();
  std::optional<Trajectory> groundtruth;
};

/// Malformed input; the message names the file and line.
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads `imu.csv`, `scans/<index>.csv`, `calib.txt` and the optional
/// `groundtruth.txt` below `root`. Doppler values are multiplied by
/// `doppler_sign`. Scan files without rows yield empty scans with
/// `empty_file` set; they are skipped by the odometry loop.
Dataset load_dataset(const std::filesystem::path& root, double doppler_sign = 1.0);

/// One `scans/<index>.csv` file.
RadarScan load_scan_file(const std::filesystem::path& file, double doppler_sign = 1.0);

/// Writes the same layout load_dataset reads.
void write_dataset(const Dataset& dataset, const std::filesystem::path& root);

}  // namespace grio
