#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "grio/trajectory.hpp"

namespace grio {

class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct AssociatedPair {
  double timestamp = 0.0;
  PoseSE3 estimate;
  PoseSE3 reference;
};

/// Nearest-timestamp association of each estimate pose to the reference,
/// keeping pairs closer than `max_gap` seconds.
std::vector<AssociatedPair> associate(const Trajectory& estimate, const Trajectory& reference,
                                      double max_gap);

struct RelativeErrorRow {
  double length = 0.0;
  double t_rel_pct = 0.0;
  double r_rel_deg_per_m = 0.0;
  std::size_t segments = 0;
};

struct RelativeErrorTable {
  std::vector<RelativeErrorRow> rows;
  /// Averages over the lengths that produced at least one segment.
  double t_rel_pct = 0.0;
  double r_rel_deg_per_m = 0.0;
};

/// Sub-trajectory drift: for every associated start pose and every length L,
/// the first pose at least L metres further along the reference closes the
/// segment. The error of the estimated relative motion against the reference
/// one is reported as translation % of L and rotation degrees per metre.
RelativeErrorTable evaluate_relative_errors(const Trajectory& estimate, const Trajectory& reference,
                                            std::span<const double> lengths,
                                            double max_gap = 0.05);

/// RMSE of associated positions, optionally after a rigid (Umeyama) alignment.
double absolute_trajectory_error(const Trajectory& estimate, const Trajectory& reference,
                                 double max_gap = 0.05, bool align = true);

/// Aligned-text rendering of the table.
std::string format_table(const RelativeErrorTable& table);
/// `length,t_rel_pct,r_rel_deg_per_m` plus one row per length and a final
/// `mean` row. Lengths without segments report `nan`.
std::string format_csv(const RelativeErrorTable& table);

/// Per-axis dump for plotting: `t,est_x,est_y,est_z,ref_x,ref_y,ref_z`.
void write_axis_dump(const std::vector<AssociatedPair>& pairs, const std::filesystem::path& path);

}  // namespace grio
