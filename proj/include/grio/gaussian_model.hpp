#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "grio/adam.hpp"
#include "grio/geom.hpp"

namespace grio {

using PointCloud = std::vector<Vec3>;

inline constexpr double kNoScaleFloor = -std::numeric_limits<double>::infinity();

/// One trivariate normal. `log_scales` are the raw log standard deviations
/// along the principal axes and `rot` the raw (unnormalized) quaternion in
/// (w, x, y, z) order; the effective values are max(s_min, log_scales) and
/// rot / |rot|.
struct Gaussian {
  Vec3 mu = Vec3::Zero();
  Vec3 log_scales = Vec3::Zero();
  Vec4 rot = Vec4(1.0, 0.0, 0.0, 0.0);
};

struct GaussianModel {
  std::vector<Gaussian> gaussians;
  double s_min = std::log(0.05);
  double s_disc = std::log(0.05);

  std::size_t size() const { return gaussians.size(); }
};

/// Points grouped by the Gaussian they were matched to.
struct Assignment {
  std::vector<int> owner;
  std::vector<std::vector<int>> members;
};

struct GaussianGradient {
  Vec3 mu = Vec3::Zero();
  Vec3 log_scales = Vec3::Zero();
  Vec4 rot = Vec4::Zero();
};

struct ModelLoss {
  double loss = 0.0;
  std::vector<double> per_gaussian;
  std::vector<GaussianGradient> gradients;
};

/// Raised when fitting produces a non-finite loss.
class ModelError : public std::runtime_error {
 public:
  ModelError(const std::string& what, int gaussian_index)
      : std::runtime_error(what), gaussian_index_(gaussian_index) {}
  int gaussian_index() const { return gaussian_index_; }

 private:
  int gaussian_index_;
};

Vec3 effective_log_scales(const Gaussian& g, double s_min = kNoScaleFloor);
UnitQuaternion effective_rotation(const Gaussian& g);

/// Sigma = R S S^T R^T with S = diag(exp(effective log-scales)).
Mat3 covariance_of(const Gaussian& g, double s_min = kNoScaleFloor);

/// M^-1 (p - mu) with M^-1 = S^-1 R^T. Its squared norm is the squared
/// Mahalanobis distance of p.
Vec3 transform_to_local(const Gaussian& g, const Vec3& p, double s_min = kNoScaleFloor);

/// Rows of S^-1 R^T, cached for repeated evaluation.
Mat3 inverse_shape(const Gaussian& g, double s_min = kNoScaleFloor);

/// Default number of Gaussians for a cloud: min(floor(size / 10), 150), at least 1.
int default_gaussian_count(std::size_t cloud_size, int points_per_gaussian = 10,
                           int max_gaussians = 150);

/// Unit-scale, identity-rotation Gaussians centred on Bisecting K-Means
/// centroids. Throws std::invalid_argument on an empty cloud; if the cloud has
/// fewer points than requested Gaussians the count is reduced with a warning.
GaussianModel init_model(std::span<const Vec3> cloud, int n_gaussians, double s_min,
                         double s_disc, std::uint64_t seed = 0);

/// Euclidean nearest-centre assignment, ties resolved to the lower index.
Assignment assign_points(const GaussianModel& model, std::span<const Vec3> cloud);

/// Mean over Gaussians of
///   1/(2|G_j|) sum |p_hat|^2 + sum_k s_hat_k + (min_k s_hat_k - s_disc)^+
/// with gradients for mu, raw log-scales and raw quaternion. Gaussians with no
/// assigned points contribute only the last two terms.
ModelLoss model_loss(const GaussianModel& model, const Assignment& assignment,
                     std::span<const Vec3> cloud);

struct FitOptions {
  int epochs = 100;
  double lr_mu = 1e-2;
  double lr_scale = 1e-2;
  double lr_rot = 1e-2;
  StepSchedule schedule;
  /// Stop when the loss improved by less than this over `early_stop_window` epochs.
  double early_stop_tol = 1e-6;
  int early_stop_window = 10;
  /// Stop before stepping when every gradient entry is below this. Adam
  /// normalizes step sizes, so without it a model at its optimum would be
  /// kicked around by lr-sized steps driven by round-off gradients.
  double gradient_tol = 1e-9;
};

struct FitResult {
  GaussianModel model;
  std::vector<double> loss_history;
};

FitResult fit_model(GaussianModel model, std::span<const Vec3> cloud,
                    const FitOptions& options = {});

/// One line per Gaussian: `mu_x mu_y mu_z s1 s2 s3 qw qx qy qz`.
void write_model(const GaussianModel& model, const std::filesystem::path& path);
GaussianModel read_model(const std::filesystem::path& path, double s_min, double s_disc);

/// Bisecting K-Means centroids (see kmeans.cpp).
struct KMeansOptions {
  int restarts = 10;
  int lloyd_iterations = 20;
};

std::vector<Vec3> bisecting_kmeans(std::span<const Vec3> cloud, int k, std::uint64_t seed,
                                   const KMeansOptions& options = {});

}  // namespace grio
