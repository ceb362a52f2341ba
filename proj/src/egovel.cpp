#include "grio/egovel.hpp"

#include <algorithm>
#include <random>

namespace grio {

namespace {

constexpr double kRankTol = 1e-9;

struct LsqSolution {
  Vec3 v;
  Mat3 normal;  // A^T A
};

std::optional<LsqSolution> solve_lsq(const std::vector<Vec3>& dirs, const std::vector<double>& doppler,
                                     const std::vector<int>& rows) {
  if (rows.size() < 3) return std::nullopt;
  Mat3 AtA = Mat3::Zero();
  Vec3 Atb = Vec3::Zero();
  for (int i : rows) {
    AtA += dirs[i] * dirs[i].transpose();
    // doppler = -dir . v  =>  A = dir^T, b = -doppler
    Atb -= dirs[i] * doppler[i];
  }
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(AtA);
  if (eig.eigenvalues().minCoeff() <= kRankTol * std::max(1.0, eig.eigenvalues().maxCoeff())) {
    return std::nullopt;
  }
  return LsqSolution{AtA.ldlt().solve(Atb), AtA};
}

}  // namespace

std::size_t EgovelEstimate::inlier_count() const {
  return static_cast<std::size_t>(std::count(inlier_mask.begin(), inlier_mask.end(), true));
}

double doppler_residual(const Vec3& point_dir, double doppler, const Vec3& v) {
  return doppler + point_dir.dot(v);
}

std::optional<EgovelEstimate> estimate_egovelocity(const RadarScan& scan, const RansacConfig& cfg) {
  const std::size_t n = scan.points.size();
  std::vector<Vec3> dirs(n);
  std::vector<double> doppler(n);
  std::vector<int> usable;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = scan.points[i].position.norm();
    doppler[i] = scan.points[i].doppler;
    if (r > 0.0 && std::isfinite(r) && std::isfinite(doppler[i])) {
      dirs[i] = scan.points[i].position / r;
      usable.push_back(static_cast<int>(i));
    } else {
      dirs[i] = Vec3::Zero();
    }
  }
  if (usable.size() < 3) return std::nullopt;

  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick(0, usable.size() - 1);
  std::vector<int> best_consensus;
  std::vector<int> consensus;
  for (int it = 0; it < cfg.iterations; ++it) {
    const int a = usable[pick(rng)];
    const int b = usable[pick(rng)];
    const int c = usable[pick(rng)];
    if (a == b || b == c || a == c) continue;
    const auto sol = solve_lsq(dirs, doppler, {a, b, c});
    if (!sol) continue;
    consensus.clear();
    for (int i : usable) {
      if (std::abs(doppler_residual(dirs[i], doppler[i], sol->v)) < cfg.threshold) {
        consensus.push_back(i);
      }
    }
    if (consensus.size() > best_consensus.size()) best_consensus = consensus;
    if (best_consensus.size() == usable.size()) break;
  }
  if (best_consensus.size() < 3) {
    // No valid minimal sample was drawn; fall back to all usable points.
    best_consensus = usable;
  }

  const auto fit = solve_lsq(dirs, doppler, best_consensus);
  if (!fit) return std::nullopt;

  EgovelEstimate est;
  est.v_body = fit->v;
  est.inlier_mask.assign(n, false);
  double sq_sum = 0.0;
  for (int i : best_consensus) {
    est.inlier_mask[i] = true;
    const double r = doppler_residual(dirs[i], doppler[i], fit->v);
    sq_sum += r * r;
  }
  const double dof = static_cast<double>(best_consensus.size()) - 3.0;
  const double sigma2 = dof > 0.0 ? sq_sum / dof : 0.0;
  est.cov = sigma2 * fit->normal.inverse() + cfg.cov_floor * Mat3::Identity();
  est.cov = 0.5 * (est.cov + est.cov.transpose()).eval();
  return est;
}

RadarScan rotate_scan(const RadarScan& scan, const Mat3& rotation) {
  RadarScan out = scan;
  for (auto& p : out.points) p.position = rotation * p.position;
  return out;
}

std::vector<Vec3> select_points(const RadarScan& scan, const std::vector<bool>& mask) {
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    if (i < mask.size() && mask[i]) out.push_back(scan.points[i].position);
  }
  return out;
}

}  // namespace grio
