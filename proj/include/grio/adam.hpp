#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace grio {

/// Step-size multiplier applied on top of the base learning rates. Cosine
/// annealing from 1 down to `final_fraction` over the epoch budget;
/// final_fraction == 1 gives a constant step size.
struct StepSchedule {
  double final_fraction = 1.0;

  double factor(int epoch, int epochs) const {
    if (epochs <= 1 || final_fraction >= 1.0) return 1.0;
    const double progress = static_cast<double>(epoch) / (epochs - 1);
    return final_fraction +
           0.5 * (1.0 - final_fraction) * (1.0 + std::cos(std::numbers::pi * progress));
  }
};

/// Adam moment estimates for a flat parameter vector.
class AdamState {
 public:
  explicit AdamState(Eigen::Index size, double beta1 = 0.9, double beta2 = 0.999,
                     double eps = 1e-8)
      : m_(Eigen::VectorXd::Zero(size)),
        v_(Eigen::VectorXd::Zero(size)),
        beta1_(beta1),
        beta2_(beta2),
        eps_(eps) {}

  /// Returns the increment to add to the parameters (already negated).
  Eigen::VectorXd step(const Eigen::VectorXd& grad, const Eigen::VectorXd& lr) {
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(beta1_, t_);
    const double c2 = 1.0 - std::pow(beta2_, t_);
    const Eigen::ArrayXd m_hat = m_.array() / c1;
    const Eigen::ArrayXd v_hat = v_.array() / c2;
    return -(lr.array() * m_hat / (v_hat.sqrt() + eps_)).matrix();
  }

 private:
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  double beta1_;
  double beta2_;
  double eps_;
  int t_ = 0;
};

}  // namespace grio
