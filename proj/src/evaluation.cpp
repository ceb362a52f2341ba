#include "grio/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <Eigen/Geometry>
#include <fmt/format.h>

namespace grio {

std::vector<AssociatedPair> associate(const Trajectory& estimate, const Trajectory& reference,
                                      double max_gap) {
  std::vector<AssociatedPair> pairs;
  if (reference.empty()) return pairs;
  for (const StampedPose& e : estimate) {
    const auto it = std::lower_bound(
        reference.begin(), reference.end(), e.timestamp,
        [](const StampedPose& r, double t) { return r.timestamp < t; });
    const StampedPose* best = nullptr;
    if (it != reference.end()) best = &*it;
    if (it != reference.begin()) {
      const StampedPose* prev = &*std::prev(it);
      if (!best || e.timestamp - prev->timestamp <= best->timestamp - e.timestamp) best = prev;
    }
    if (best && std::abs(best->timestamp - e.timestamp) <= max_gap) {
      pairs.push_back({e.timestamp, e.pose, best->pose});
    }
  }
  return pairs;
}

RelativeErrorTable evaluate_relative_errors(const Trajectory& estimate, const Trajectory& reference,
                                            std::span<const double> lengths, double max_gap) {
  if (reference.size() < 2) {
    throw EvaluationError("reference trajectory needs at least two poses");
  }
  const std::vector<AssociatedPair> pairs = associate(estimate, reference, max_gap);
  if (pairs.size() < 2) {
    throw EvaluationError("estimate and reference do not overlap in time");
  }

  std::vector<double> dist(pairs.size(), 0.0);
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    dist[i] = dist[i - 1] + (pairs[i].reference.t - pairs[i - 1].reference.t).norm();
  }

  RelativeErrorTable table;
  int used = 0;
  for (const double L : lengths) {
    RelativeErrorRow row;
    row.length = L;
    double t_sum = 0.0, r_sum = 0.0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      j = std::max(j, i + 1);
      while (j < pairs.size() && dist[j] - dist[i] < L) ++j;
      if (j >= pairs.size()) break;
      const PoseSE3 d_ref = pose_relative(pairs[i].reference, pairs[j].reference);
      const PoseSE3 d_est = pose_relative(pairs[i].estimate, pairs[j].estimate);
      const PoseSE3 err = pose_relative(d_ref, d_est);
      t_sum += err.t.norm();
      r_sum += err.q.angle() * kRadToDeg;
      ++row.segments;
    }
    if (row.segments > 0) {
      const double n = static_cast<double>(row.segments);
      row.t_rel_pct = 100.0 * t_sum / n / L;
      row.r_rel_deg_per_m = r_sum / n / L;
      table.t_rel_pct += row.t_rel_pct;
      table.r_rel_deg_per_m += row.r_rel_deg_per_m;
      ++used;
    }
    table.rows.push_back(row);
  }
  if (used > 0) {
    table.t_rel_pct /= used;
    table.r_rel_deg_per_m /= used;
  }
  return table;
}

double absolute_trajectory_error(const Trajectory& estimate, const Trajectory& reference,
                                 double max_gap, bool align) {
  const std::vector<AssociatedPair> pairs = associate(estimate, reference, max_gap);
  if (pairs.empty()) throw EvaluationError("estimate and reference do not overlap in time");
  const auto n = static_cast<Eigen::Index>(pairs.size());
  Eigen::Matrix3Xd est(3, n), ref(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    est.col(i) = pairs[static_cast<std::size_t>(i)].estimate.t;
    ref.col(i) = pairs[static_cast<std::size_t>(i)].reference.t;
  }
  if (align && n >= 3) {
    const Eigen::Matrix4d T = Eigen::umeyama(est, ref, false);
    est = (T.topLeftCorner<3, 3>() * est).colwise() + T.topRightCorner<3, 1>();
  }
  return std::sqrt((est - ref).colwise().squaredNorm().mean());
}

namespace {

bool has_segments(const RelativeErrorTable& table) {
  return std::any_of(table.rows.begin(), table.rows.end(),
                     [](const RelativeErrorRow& row) { return row.segments > 0; });
}

}  // namespace

std::string format_table(const RelativeErrorTable& table) {
  std::string out = fmt::format("{:>10} {:>12} {:>16} {:>10}\n", "length_m", "t_rel_%",
                                "r_rel_deg/m", "segments");
  for (const auto& row : table.rows) {
    if (row.segments == 0) {
      out += fmt::format("{:>10.3f} {:>12} {:>16} {:>10}\n", row.length, "-", "-", 0);
      continue;
    }
    out += fmt::format("{:>10.3f} {:>12.4f} {:>16.6f} {:>10}\n", row.length, row.t_rel_pct,
                       row.r_rel_deg_per_m, row.segments);
  }
  if (!has_segments(table)) return out + fmt::format("{:>10} {:>12} {:>16}\n", "mean", "-", "-");
  out += fmt::format("{:>10} {:>12.4f} {:>16.6f}\n", "mean", table.t_rel_pct,
                     table.r_rel_deg_per_m);
  return out;
}

std::string format_csv(const RelativeErrorTable& table) {
  std::string out = "length,t_rel_pct,r_rel_deg_per_m\n";
  for (const auto& row : table.rows) {
    if (row.segments == 0) {
      out += fmt::format("{:.9g},nan,nan\n", row.length);
      continue;
    }
    out += fmt::format("{:.9g},{:.9g},{:.9g}\n", row.length, row.t_rel_pct, row.r_rel_deg_per_m);
  }
  if (!has_segments(table)) return out + "mean,nan,nan\n";
  out += fmt::format("mean,{:.9g},{:.9g}\n", table.t_rel_pct, table.r_rel_deg_per_m);
  return out;
}

void write_axis_dump(const std::vector<AssociatedPair>& pairs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "t,est_x,est_y,est_z,ref_x,ref_y,ref_z\n";
  for (const auto& p : pairs) {
    out << fmt::format("{:.9f},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", p.timestamp,
                       p.estimate.t.x(), p.estimate.t.y(), p.estimate.t.z(), p.reference.t.x(),
                       p.reference.t.y(), p.reference.t.z());
  }
}

}  // namespace grio
