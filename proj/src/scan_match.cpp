#include "grio/scan_match.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace grio {

MatchTarget::MatchTarget(const GaussianModel& model) {
  centers.reserve(model.size());
  inv_shapes.reserve(model.size());
  for (const Gaussian& g : model.gaussians) {
    centers.push_back(g.mu);
    inv_shapes.push_back(inverse_shape(g, model.s_min));
  }
}

std::vector<PoseHypothesis> sample_hypotheses(const PoseSE3& center, const MatchConfig& cfg,
                                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<PoseHypothesis> out;
  out.reserve(static_cast<std::size_t>(std::max(cfg.n_hypotheses, 1)));
  out.push_back({center, 0.0, false});
  for (int k = 1; k < cfg.n_hypotheses; ++k) {
    Vec6 e;
    for (int i = 0; i < 6; ++i) e[i] = cfg.dispersion[i] * normal(rng);
    PoseSE3 pose;
    pose.t = center.t + e.head<3>();
    pose.q = rotation_exp(e.tail<3>()) * center.q;
    out.push_back({pose, 0.0, false});
  }
  return out;
}

MatchLoss match_loss(const MatchTarget& target, std::span<const Vec3> cloud, const PoseSE3& pose,
                     double mahal_clamp) {
  MatchLoss out;
  if (cloud.empty()) return out;
  const Mat3 R = quat_to_rotmat(pose.q);
  const std::size_t n_g = target.centers.size();

  for (const Vec3& p : cloud) {
    const Vec3 rp = R * p;
    const Vec3 x = rp + pose.t;
    double best_sq = std::numeric_limits<double>::infinity();
    std::size_t best = 0;
    Vec3 best_local = Vec3::Zero();
    for (std::size_t j = 0; j < n_g; ++j) {
      const Vec3 local = target.inv_shapes[j] * (x - target.centers[j]);
      const double sq = local.squaredNorm();
      if (sq < best_sq) {
        best_sq = sq;
        best = j;
        best_local = local;
      }
    }
    const double d = std::sqrt(best_sq);
    if (d >= mahal_clamp) {
      out.loss += mahal_clamp;
      continue;
    }
    out.loss += d;
    if (d > 0.0) {
      // d(d)/dx = M^-T local / d
      const Vec3 g = target.inv_shapes[best].transpose() * best_local / d;
      out.grad_translation += g;
      out.grad_rotation += rp.cross(g);
    }
  }
  const double inv_m = 1.0 / static_cast<double>(cloud.size());
  out.loss *= inv_m;
  out.grad_translation *= inv_m;
  out.grad_rotation *= inv_m;
  return out;
}

MatchLoss match_loss(const GaussianModel& model, std::span<const Vec3> cloud, const PoseSE3& pose,
                     double mahal_clamp) {
  return match_loss(MatchTarget(model), cloud, pose, mahal_clamp);
}

namespace {

std::vector<Vec3> downsample(std::span<const Vec3> cloud, int target, std::uint64_t seed) {
  if (target <= 0 || cloud.size() <= static_cast<std::size_t>(target)) {
    return {cloud.begin(), cloud.end()};
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> idx(cloud.size());
  std::iota(idx.begin(), idx.end(), 0);
  // Partial Fisher-Yates; the kept indices are sorted to preserve scan order.
  for (int i = 0; i < target; ++i) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), idx.size() - 1);
    std::swap(idx[static_cast<std::size_t>(i)], idx[pick(rng)]);
  }
  idx.resize(static_cast<std::size_t>(target));
  std::sort(idx.begin(), idx.end());
  std::vector<Vec3> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(cloud[i]);
  return out;
}

PoseSE3 apply_increment(const PoseSE3& pose, const Eigen::VectorXd& delta) {
  PoseSE3 out;
  out.t = pose.t + delta.head<3>();
  out.q = quat_exp(0.5 * Vec3(delta.tail<3>())) * pose.q;
  return out;
}

}  // namespace

RegistrationResult register_scan(const GaussianModel& model, std::span<const Vec3> cloud,
                                 const PoseSE3& center, const MatchConfig& cfg) {
  const std::vector<Vec3> points = downsample(cloud, cfg.downsample_target, cfg.seed);
  const MatchTarget target(model);

  RegistrationResult result;
  result.all = sample_hypotheses(center, cfg, cfg.seed + 1);
  std::vector<AdamState> adam(result.all.size(), AdamState(6));
  std::vector<PoseSE3> last_finite(result.all.size());
  for (std::size_t k = 0; k < result.all.size(); ++k) last_finite[k] = result.all[k].pose;

  Eigen::VectorXd lr(6);
  lr << Vec3::Constant(cfg.lr_translation), Vec3::Constant(cfg.lr_rotation);
  Eigen::VectorXd grad(6);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double factor = cfg.schedule.factor(epoch, cfg.epochs);
    for (std::size_t k = 0; k < result.all.size(); ++k) {
      PoseHypothesis& h = result.all[k];
      if (h.frozen) continue;
      const MatchLoss l = match_loss(target, points, h.pose, cfg.mahal_clamp);
      if (!std::isfinite(l.loss) || !l.grad_translation.allFinite() ||
          !l.grad_rotation.allFinite()) {
        h.frozen = true;
        h.pose = last_finite[k];
        if (epoch == 0) h.loss = std::numeric_limits<double>::infinity();
        continue;
      }
      h.loss = l.loss;
      last_finite[k] = h.pose;
      grad << l.grad_translation, l.grad_rotation;
      h.pose = apply_increment(h.pose, adam[k].step(grad, lr * factor));
    }
  }

  // Score the final poses; a hypothesis that went non-finite on its last step
  // keeps the loss of its last finite state.
  std::size_t best = 0;
  for (std::size_t k = 0; k < result.all.size(); ++k) {
    PoseHypothesis& h = result.all[k];
    if (!h.frozen) {
      const double final_loss = match_loss(target, points, h.pose, cfg.mahal_clamp).loss;
      if (std::isfinite(final_loss)) {
        h.loss = final_loss;
      } else {
        h.frozen = true;
        h.pose = last_finite[k];
      }
    }
    if (!std::isfinite(h.loss)) h.loss = std::numeric_limits<double>::infinity();
    if (h.loss < result.all[best].loss) best = k;
  }
  result.best = result.all[best].pose;
  result.best_loss = result.all[best].loss;
  return result;
}

bool keyframe_due(const PoseSE3& last_kf, const PoseSE3& current, const KeyframeCriteria& crit) {
  constexpr double kBoundaryTol = 1e-12;
  const PoseSE3 rel = pose_relative(last_kf, current);
  if (rel.t.norm() >= crit.kf_dist_max - kBoundaryTol) return true;
  // 2 acos|w| >= angle  <=>  |w| <= cos(angle / 2)
  return std::abs(rel.q.w()) <= std::cos(0.5 * crit.kf_angle_max) + kBoundaryTol;
}

}  // namespace grio
