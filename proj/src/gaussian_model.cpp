#include "grio/gaussian_model.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <spdlog/spdlog.h>

namespace grio {

namespace {

// Partial derivatives of R(q) with respect to the unit quaternion
// components (w, x, y, z).
std::array<Mat3, 4> rotmat_partials(const Vec4& q) {
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  std::array<Mat3, 4> d;
  d[0] << 0.0, -z, y,
      z, 0.0, -x,
      -y, x, 0.0;
  d[1] << 0.0, y, z,
      y, -2.0 * x, -w,
      z, w, -2.0 * x;
  d[2] << -2.0 * y, x, w,
      x, 0.0, z,
      -w, z, -2.0 * y;
  d[3] << -2.0 * z, -w, x,
      w, -2.0 * z, y,
      x, y, 0.0;
  for (auto& m : d) m *= 2.0;
  return d;
}

Mat3 rotmat_from_raw(const Vec4& q) {
  const Vec4 u = q.normalized();
  const double w = u[0], x = u[1], y = u[2], z = u[3];
  Mat3 R;
  R << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
      2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
      2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
  return R;
}

int argmin_index(const Vec3& v) {
  int k = 0;
  for (int i = 1; i < 3; ++i) {
    if (v[i] < v[k]) k = i;
  }
  return k;
}

}  // namespace

Vec3 effective_log_scales(const Gaussian& g, double s_min) {
  return g.log_scales.cwiseMax(s_min);
}

UnitQuaternion effective_rotation(const Gaussian& g) {
  return {g.rot[0], g.rot[1], g.rot[2], g.rot[3]};
}

Mat3 covariance_of(const Gaussian& g, double s_min) {
  const Mat3 R = rotmat_from_raw(g.rot);
  const Vec3 var = (2.0 * effective_log_scales(g, s_min)).array().exp();
  return R * var.asDiagonal() * R.transpose();
}

Mat3 inverse_shape(const Gaussian& g, double s_min) {
  const Vec3 inv_scale = (-effective_log_scales(g, s_min)).array().exp();
  return inv_scale.asDiagonal() * rotmat_from_raw(g.rot).transpose();
}

Vec3 transform_to_local(const Gaussian& g, const Vec3& p, double s_min) {
  return inverse_shape(g, s_min) * (p - g.mu);
}

int default_gaussian_count(std::size_t cloud_size, int points_per_gaussian, int max_gaussians) {
  const auto n = static_cast<int>(cloud_size / static_cast<std::size_t>(points_per_gaussian));
  return std::max(1, std::min(n, max_gaussians));
}

GaussianModel init_model(std::span<const Vec3> cloud, int n_gaussians, double s_min,
                         double s_disc, std::uint64_t seed) {
  if (cloud.empty()) {
    throw std::invalid_argument("init_model: empty point cloud");
  }
  if (n_gaussians < 1) {
    throw std::invalid_argument("init_model: need at least one Gaussian");
  }
  if (static_cast<std::size_t>(n_gaussians) > cloud.size()) {
    spdlog::warn("init_model: {} Gaussians requested for {} points, reducing to {}", n_gaussians,
                 cloud.size(), cloud.size());
    n_gaussians = static_cast<int>(cloud.size());
  }

  GaussianModel model;
  model.s_min = s_min;
  model.s_disc = s_disc;
  for (const Vec3& c : bisecting_kmeans(cloud, n_gaussians, seed)) {
    Gaussian g;
    g.mu = c;
    model.gaussians.push_back(g);
  }
  return model;
}

Assignment assign_points(const GaussianModel& model, std::span<const Vec3> cloud) {
  Assignment a;
  a.owner.resize(cloud.size());
  a.members.resize(model.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < model.size(); ++j) {
      const double d = (cloud[i] - model.gaussians[j].mu).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(j);
      }
    }
    a.owner[i] = best;
    a.members[best].push_back(static_cast<int>(i));
  }
  return a;
}

ModelLoss model_loss(const GaussianModel& model, const Assignment& assignment,
                     std::span<const Vec3> cloud) {
  const std::size_t n_g = model.size();
  ModelLoss out;
  out.per_gaussian.assign(n_g, 0.0);
  out.gradients.assign(n_g, GaussianGradient{});

  for (std::size_t j = 0; j < n_g; ++j) {
    const Gaussian& g = model.gaussians[j];
    GaussianGradient& grad = out.gradients[j];
    const Vec3 s_hat = effective_log_scales(g, model.s_min);
    const double q_norm = g.rot.norm();
    const Vec4 q = g.rot / q_norm;
    const Mat3 R = rotmat_from_raw(g.rot);
    const Vec3 inv_var = (-2.0 * s_hat).array().exp();

    double loss = s_hat.sum();
    Vec3 grad_s_hat = Vec3::Ones();

    const auto& members = assignment.members[j];
    if (!members.empty()) {
      const double inv_n = 1.0 / static_cast<double>(members.size());
      Mat3 scatter = Mat3::Zero();
      Vec3 mean_d = Vec3::Zero();
      for (int i : members) {
        const Vec3 d = cloud[i] - g.mu;
        scatter += d * d.transpose();
        mean_d += d;
      }
      scatter *= inv_n;
      mean_d *= inv_n;

      // Mahalanobis term: 0.5 * tr(S^-2 R^T A R).
      const Mat3 B = R.transpose() * scatter * R;
      loss += 0.5 * inv_var.dot(B.diagonal());
      grad_s_hat -= inv_var.cwiseProduct(B.diagonal());
      grad.mu = -(R * inv_var.asDiagonal() * R.transpose()) * mean_d;

      const Mat3 grad_R = scatter * R * inv_var.asDiagonal();
      const auto partials = rotmat_partials(q);
      Vec4 grad_q;
      for (int c = 0; c < 4; ++c) grad_q[c] = grad_R.cwiseProduct(partials[c]).sum();
      grad.rot = (Eigen::Matrix4d::Identity() - q * q.transpose()) * grad_q / q_norm;
    }

    const int k_min = argmin_index(s_hat);
    const double disc = s_hat[k_min] - model.s_disc;
    if (disc > 0.0) {
      loss += disc;
      grad_s_hat[k_min] += 1.0;
    }

    for (int k = 0; k < 3; ++k) {
      grad.log_scales[k] = g.log_scales[k] >= model.s_min ? grad_s_hat[k] : 0.0;
    }
    out.per_gaussian[j] = loss;
  }

  const double inv_g = 1.0 / static_cast<double>(n_g);
  for (std::size_t j = 0; j < n_g; ++j) {
    out.loss += out.per_gaussian[j];
    out.gradients[j].mu *= inv_g;
    out.gradients[j].log_scales *= inv_g;
    out.gradients[j].rot *= inv_g;
  }
  out.loss *= inv_g;
  return out;
}

FitResult fit_model(GaussianModel model, std::span<const Vec3> cloud, const FitOptions& options) {
  const std::size_t n_g = model.size();
  const auto n_params = static_cast<Eigen::Index>(10 * n_g);
  AdamState adam(n_params);
  Eigen::VectorXd base_lr(n_params);
  for (std::size_t j = 0; j < n_g; ++j) {
    base_lr.segment<3>(10 * j).setConstant(options.lr_mu);
    base_lr.segment<3>(10 * j + 3).setConstant(options.lr_scale);
    base_lr.segment<4>(10 * j + 6).setConstant(options.lr_rot);
  }

  FitResult result;
  Eigen::VectorXd grad(n_params);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const Assignment assignment = assign_points(model, cloud);
    const ModelLoss l = model_loss(model, assignment, cloud);
    if (!std::isfinite(l.loss)) {
      int bad = 0;
      while (bad < static_cast<int>(n_g) && std::isfinite(l.per_gaussian[bad])) ++bad;
      const Gaussian& g = model.gaussians[std::min<int>(bad, static_cast<int>(n_g) - 1)];
      std::ostringstream msg;
      msg << "fit_model: non-finite loss at epoch " << epoch << " in Gaussian " << bad
          << " (mu = " << g.mu.transpose() << ", s = " << g.log_scales.transpose()
          << ", |G_j| = " << assignment.members[bad].size() << ")";
      throw ModelError(msg.str(), bad);
    }
    result.loss_history.push_back(l.loss);

    const int w = options.early_stop_window;
    if (w > 0 && epoch >= w &&
        result.loss_history[epoch - w] - l.loss < options.early_stop_tol) {
      break;
    }

    for (std::size_t j = 0; j < n_g; ++j) {
      grad.segment<3>(10 * j) = l.gradients[j].mu;
      grad.segment<3>(10 * j + 3) = l.gradients[j].log_scales;
      grad.segment<4>(10 * j + 6) = l.gradients[j].rot;
    }
    if (grad.lpNorm<Eigen::Infinity>() < options.gradient_tol) break;
    const Eigen::VectorXd delta =
        adam.step(grad, base_lr * options.schedule.factor(epoch, options.epochs));
    for (std::size_t j = 0; j < n_g; ++j) {
      Gaussian& g = model.gaussians[j];
      g.mu += delta.segment<3>(10 * j);
      g.log_scales = (g.log_scales + delta.segment<3>(10 * j + 3)).cwiseMax(model.s_min);
      g.rot += delta.segment<4>(10 * j + 6);
      g.rot.normalize();
    }
  }
  result.model = std::move(model);
  return result;
}

void write_model(const GaussianModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << std::setprecision(9);
  for (const Gaussian& g : model.gaussians) {
    const Vec4 q = g.rot.normalized();
    out << g.mu.x() << ' ' << g.mu.y() << ' ' << g.mu.z() << ' ' << g.log_scales.x() << ' '
        << g.log_scales.y() << ' ' << g.log_scales.z() << ' ' << q[0] << ' ' << q[1] << ' '
        << q[2] << ' ' << q[3] << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

GaussianModel read_model(const std::filesystem::path& path, double s_min, double s_disc) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  GaussianModel model;
  model.s_min = s_min;
  model.s_disc = s_disc;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    Gaussian g;
    ss >> g.mu.x() >> g.mu.y() >> g.mu.z() >> g.log_scales.x() >> g.log_scales.y() >>
        g.log_scales.z() >> g.rot[0] >> g.rot[1] >> g.rot[2] >> g.rot[3];
    if (!ss) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 10 numbers");
    }
    model.gaussians.push_back(g);
  }
  return model;
}

}  // namespace grio
