// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <fmt/core.h>
#include <spdlog/spdlog.h>

#include "fixtures.hpp"
#include "grio/egovel.hpp"
#include "grio/ekf.hpp"
#include "grio/evaluation.hpp"
#include "grio/odometry.hpp"
#include "grio/scan_match.hpp"
#include "grio/synthetic.hpp"
#include "oracles.hpp"
#include "temp_dir.hpp"
#include "test_util.hpp"

using namespace grio;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;  // <= 0 means no runtime bound
  std::function<Outcome()> run;
};

// 1. Analytic gradients against central differences.
Outcome gradient_oracles() {
  std::mt19937_64 rng(101);
  double model_worst = 0.0, match_worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    model_worst = std::max(model_worst, test::check_model_gradient(test::random_model_instance(rng)).worst);
    match_worst = std::max(match_worst,
                           test::check_match_gradient(test::random_match_instance(rng), 4.0).worst);
  }
  return {model_worst < 1e-4 && match_worst < 1e-3,
          fmt::format("model worst rel {:.2e} (<1e-4), match worst rel {:.2e} (<1e-3), 100 instances each",
                      model_worst, match_worst)};
}

// 2. Log-det and Mahalanobis identities on random Gaussians.
Outcome gaussian_identities() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(-4.0, 1.0);
  double logdet_worst = 0.0, mahal_worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Gaussian g;
    g.mu = test::random_vec(rng, 3.0);
    g.log_scales = Vec3(u(rng), u(rng), u(rng));
    g.rot = test::random_rotation(rng).wxyz() * (0.5 + std::abs(u(rng)));
    const Mat3 cov = covariance_of(g);
    // Explicit oracle: R diag(exp(2s)) R^T from an Eigen quaternion.
    const Eigen::Quaterniond eq(g.rot[0], g.rot[1], g.rot[2], g.rot[3]);
    const Mat3 R = eq.normalized().toRotationMatrix();
    const Mat3 oracle = R * (2.0 * g.log_scales).array().exp().matrix().asDiagonal() * R.transpose();
    logdet_worst = std::max(logdet_worst,
                            std::abs(0.5 * std::log(oracle.determinant()) - g.log_scales.sum()));
    logdet_worst = std::max(logdet_worst, std::abs(0.5 * std::log(cov.determinant()) - g.log_scales.sum()));
    const Vec3 p = g.mu + test::random_vec(rng, 2.0);
    const double direct = (p - g.mu).dot(oracle.ldlt().solve(p - g.mu));
    const double local = transform_to_local(g, p).squaredNorm();
    mahal_worst = std::max(mahal_worst, std::abs(direct - local) / std::max(1.0, direct));
  }
  return {logdet_worst < 1e-8 && mahal_worst < 1e-8,
          fmt::format("log-det worst {:.2e}, Mahalanobis worst rel {:.2e} (<1e-8), 1000 Gaussians",
                      logdet_worst, mahal_worst)};
}

// 3. N=1 fit recovers the sample covariance.
Outcome covariance_recovery() {
  std::mt19937_64 rng(303);
  const Eigen::LLT<Mat3> llt(Mat3(Vec3(4.0, 1.0, 0.25).asDiagonal()));
  std::vector<Vec3> pts;
  for (int i = 0; i < 1000; ++i) pts.push_back(Vec3(1, -1, 2) + llt.matrixL() * test::random_vec(rng));
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : pts) mean += p;
  mean /= 1000.0;
  Mat3 sample = Mat3::Zero();
  for (const Vec3& p : pts) sample += (p - mean) * (p - mean).transpose();
  sample /= 1000.0;

  // s_disc above every log-scale keeps the disc prior inactive.
  FitOptions opt;
  opt.epochs = 200;
  const FitResult fit = fit_model(init_model(pts, 1, std::log(0.05), 10.0), pts, opt);
  const Vec3 got = Eigen::SelfAdjointEigenSolver<Mat3>(covariance_of(fit.model.gaussians[0])).eigenvalues();
  const Vec3 want = Eigen::SelfAdjointEigenSolver<Mat3>(sample).eigenvalues();
  const double worst = (got.array() / want.array() - 1.0).abs().maxCoeff();
  return {worst < 0.15, fmt::format("eigenvalues ({:.3f}, {:.3f}, {:.3f}) vs oracle ({:.3f}, {:.3f}, {:.3f}), worst rel {:.3f} (<0.15)",
                                    got[0], got[1], got[2], want[0], want[1], want[2], worst)};
}

struct RegistrationTrial {
  GaussianModel model;
  std::vector<Vec3> scan;
  PoseSE3 truth;
};

RegistrationTrial planted_offset(std::uint64_t seed, double distance, double yaw_deg) {
  RegistrationTrial trial;
  const std::vector<Vec3> cloud = test::structured_cloud(seed);
  trial.model = test::fit_scene_model(cloud, seed);
  std::mt19937_64 rng(seed);
  const double heading = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
  const double yaw = (seed % 2 ? 1.0 : -1.0) * yaw_deg * kDegToRad;
  trial.truth = {Vec3(distance * std::cos(heading), distance * std::sin(heading), 0.0),
                 UnitQuaternion::from_axis_angle(Vec3::UnitZ(), yaw)};
  trial.scan = test::observe_from(cloud, trial.truth);
  return trial;
}

std::pair<double, double> pose_error(const PoseSE3& got, const PoseSE3& want) {
  return {(got.t - want.t).norm(), test::rotation_distance(got.q, want.q) * kRadToDeg};
}

// 4. Planted (0.5 m, 5 deg) offset, K=16, from the identity.
Outcome registration_recovery() {
  int ok = 0;
  double worst_t = 0.0, worst_r = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const RegistrationTrial trial = planted_offset(seed, 0.5, 5.0);
    MatchConfig cfg;
    cfg.n_hypotheses = 16;
    cfg.seed = seed;
    const auto [et, er] = pose_error(register_scan(trial.model, trial.scan, PoseSE3{}, cfg).best, trial.truth);
    worst_t = std::max(worst_t, et);
    worst_r = std::max(worst_r, er);
    ok += et < 0.05 && er < 0.5;
  }
  return {ok == 10, fmt::format("{}/10 seeds within 0.05 m / 0.5 deg (worst {:.3f} m / {:.3f} deg)", ok,
                                worst_t, worst_r)};
}

// 5. Planted (2 m, 20 deg) offset: K=16 success rate >= K=1.
Outcome multi_hypothesis() {
  // The default swarm spread and epoch budget cannot travel 2 m / 20 deg from
  // the identity at all, which would make both rates zero. A wider swarm
  // with a longer budget is used for both K.
  MatchConfig cfg;
  cfg.epochs = 100;
  cfg.dispersion << 1.0, 1.0, 0.1, 0.5 * kDegToRad, 0.5 * kDegToRad, 10.0 * kDegToRad;
  int ok1 = 0, ok16 = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const RegistrationTrial trial = planted_offset(seed, 2.0, 20.0);
    cfg.seed = seed;
    for (int k : {1, 16}) {
      cfg.n_hypotheses = k;
      const auto [et, er] = pose_error(register_scan(trial.model, trial.scan, PoseSE3{}, cfg).best, trial.truth);
      (k == 1 ? ok1 : ok16) += et < 0.1 && er < 1.0;
    }
  }
  return {ok16 >= ok1, fmt::format("success K=16 {}/20, K=1 {}/20 (0.1 m / 1 deg)", ok16, ok1)};
}

// 6. F against the numerical Jacobian of the strapdown map.
Outcome ekf_linearization() {
  std::mt19937_64 rng(606);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const EkfState s = test::random_ekf_state(rng);
    const Vec3 accel = -gravity() + test::random_vec(rng, 2.0);
    const Vec3 gyro = test::random_vec(rng, 0.5);
    const Mat15 J = test::numeric_strapdown_jacobian(s, accel, gyro, 0.01);
    const Mat15 F = linearize_strapdown(s, accel, gyro, 0.01, NoiseParams{}).F;
    worst = std::max(worst, (F - J).norm() / J.norm());
  }
  return {worst < 1e-4, fmt::format("worst ||F - J|| / ||J|| = {:.2e} (<1e-4) at dt=0.01, 100 states", worst)};
}

// 7. Monte-Carlo NEES of the filter on a simulated 60 s loop.
Outcome filter_consistency() {
  constexpr int kRuns = 50;
  constexpr double kDt = 0.01;
  constexpr int kUpdateEvery = 10;
  constexpr double kDuration = 60.0;
  constexpr double kSigmaEgo = 0.05;
  // Default densities, with a gyro-bias prior of a better-grade MEMS unit.
  NoiseParams noise = Config{}.noise;
  noise.sigma_v = 0.0;
  noise.sigma_theta = 0.0;
  noise.eta_bw = 0.001;

  SynthSpec spec;
  spec.trajectory = "loop";
  spec.duration = kDuration;
  const SyntheticMotion motion(spec);
  const int steps = static_cast<int>(std::round(kDuration / kDt));
  std::vector<double> nees(steps / kUpdateEvery, 0.0);

  for (int run = 0; run < kRuns; ++run) {
    std::mt19937_64 rng(1000 + run);
    std::normal_distribution<double> n01;
    auto gauss = [&] { return Vec3(n01(rng), n01(rng), n01(rng)); };

    EkfState truth;
    EkfState filter = init_filter(noise);
    Vec3 b_a = noise.eta_ba * gauss();
    Vec3 b_w = noise.eta_bw * gauss();
    Vec3 tilt = noise.eta_theta * gauss();
    tilt.z() = 0.0;
    filter.q = rotation_exp(-tilt);

    for (int k = 0; k < steps; ++k) {
      const MotionSample m = motion.at(k * kDt);
      const Vec3 f = m.attitude.conjugate().rotate(m.acceleration - gravity());
      const ImuSample imu{k * kDt, f + b_a + noise.sigma_a / std::sqrt(kDt) * gauss(),
                          m.angular_rate + b_w + noise.sigma_w / std::sqrt(kDt) * gauss()};
      truth = strapdown(truth, f, m.angular_rate, kDt);
      filter = propagate(filter, imu, kDt, noise);
      b_a += noise.sigma_ba * std::sqrt(kDt) * gauss();
      b_w += noise.sigma_bw * std::sqrt(kDt) * gauss();
      if ((k + 1) % kUpdateEvery != 0) continue;

      EgovelEstimate est;
      est.v_body = truth.q.conjugate().rotate(truth.v) + kSigmaEgo * gauss();
      est.cov = Mat3::Identity() * kSigmaEgo * kSigmaEgo;
      filter = egovel_update(filter, est, {.gate = false}).state;

      Vec15 e;
      e.segment<3>(idx::p) = truth.p - filter.p;
      e.segment<3>(idx::v) = truth.v - filter.v;
      e.segment<3>(idx::ba) = b_a - filter.b_a;
      e.segment<3>(idx::bw) = b_w - filter.b_w;
      e.segment<3>(idx::dtheta) = rotation_log(truth.q * filter.q.conjugate());
      nees[(k + 1) / kUpdateEvery - 1] += e.dot(filter.P.ldlt().solve(e)) / kRuns;
    }
  }

  const boost::math::chi_squared chi2(kStateDim * kRuns);
  const double lo = boost::math::quantile(chi2, 0.025) / kRuns;
  const double hi = boost::math::quantile(chi2, 0.975) / kRuns;
  const auto inside = std::count_if(nees.begin(), nees.end(), [&](double x) { return x >= lo && x <= hi; });
  const double fraction = static_cast<double>(inside) / static_cast<double>(nees.size());
  return {fraction >= 0.8, fmt::format("{:.1f}% of {} timesteps inside [{:.2f}, {:.2f}] (>=80%), {} runs",
                                       100.0 * fraction, nees.size(), lo, hi, kRuns)};
}

RadarScan static_scan(std::mt19937_64& rng, const Vec3& v, int n, double noise) {
  std::uniform_real_distribution<double> az(-1.0, 1.0), el(-0.3, 0.3), range(2.0, 30.0);
  std::normal_distribution<double> nd;
  RadarScan scan;
  for (int i = 0; i < n; ++i) {
    const double a = az(rng), e = el(rng);
    const Vec3 dir(std::cos(e) * std::cos(a), std::cos(e) * std::sin(a), std::sin(e));
    scan.points.push_back({range(rng) * dir, -dir.dot(v) + noise * nd(rng), 1.0});
  }
  return scan;
}

// 8. Egovelocity: exact noiseless recovery and outlier rejection.
Outcome egovelocity() {
  double noiseless_worst = 0.0, noisy_worst = 0.0;
  int rejected = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(800 + seed);
    const Vec3 v = test::random_vec(rng, 3.0);
    RansacConfig cfg;
    cfg.seed = seed;
    const auto clean = estimate_egovelocity(static_scan(rng, v, 50, 0.0), cfg);
    noiseless_worst = std::max(noiseless_worst, clean ? (clean->v_body - v).norm() : 1e9);

    RadarScan scan = static_scan(rng, v, 50, 0.05);
    for (int i = 40; i < 50; ++i) scan.points[i].doppler += 3.0;  // 20% outliers
    const auto est = estimate_egovelocity(scan, cfg);
    if (!est) {
      noisy_worst = 1e9;
      continue;
    }
    noisy_worst = std::max(noisy_worst, (est->v_body - v).norm());
    bool all_out = true;
    for (int i = 40; i < 50; ++i) all_out = all_out && !est->inlier_mask[i];
    rejected += all_out;
  }
  return {noiseless_worst < 1e-9 && noisy_worst < 0.1 && rejected == 20,
          fmt::format("noiseless error {:.1e} (<1e-9); 20% outliers at sigma 0.05: worst {:.3f} m/s (<0.1), "
                      "outliers rejected in {}/20 seeds",
                      noiseless_worst, noisy_worst, rejected)};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// 9. Zero-noise straight run and the scan-matching ablation.
Outcome end_to_end() {
  SynthSpec quiet;
  quiet.radar_sigma = 0.0;
  quiet.doppler_sigma = 0.0;
  const SyntheticData straight = generate_synthetic(quiet, 1);
  const OdometryResult run = run_odometry(straight.dataset, Config{});
  const PoseSE3& truth_end = straight.dataset.groundtruth->back().pose;
  const double distance = SyntheticMotion(quiet).arc_length(straight.dataset.groundtruth->back().timestamp);
  const double end_error = (run.trajectory.back().pose.t - truth_end.t).norm();
  const double end_pct = 100.0 * end_error / distance;

  SynthSpec noisy;
  noisy.scene = "room";
  noisy.trajectory = "loop";
  noisy.duration = 30.0;
  noisy.outlier_fraction = 0.1;
  noisy.sigma_a = 0.02;
  noisy.sigma_w = 0.002;
  noisy.sigma_ba = 1e-3;
  noisy.sigma_bw = 1e-4;
  noisy.bias_a = 0.05;
  noisy.bias_w = 0.005;
  std::vector<double> full, ego_only;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SyntheticData data = generate_synthetic(noisy, seed);
    Config cfg;
    cfg.seed = seed;
    full.push_back(absolute_trajectory_error(run_odometry(data.dataset, cfg).trajectory, *data.dataset.groundtruth));
    cfg.use_scan_match = false;
    ego_only.push_back(
        absolute_trajectory_error(run_odometry(data.dataset, cfg).trajectory, *data.dataset.groundtruth));
  }
  const double med_full = median(full), med_ego = median(ego_only);
  return {end_pct < 1.0 && med_full < med_ego,
          fmt::format("zero-noise {:.2f} m run end error {:.4f} m = {:.3f}% (<1%); noisy loop median ATE "
                      "full {:.4f} m vs egovelocity-only {:.4f} m over 10 seeds",
                      distance, end_error, end_pct, med_full, med_ego)};
}

// 10. Byte-identical trajectory files from identical inputs.
Outcome determinism() {
  SynthSpec spec;
  spec.duration = 6.0;
  spec.sigma_a = 0.02;
  spec.sigma_w = 0.002;
  spec.outlier_fraction = 0.1;
  const SyntheticData data = generate_synthetic(spec, 10);
  test::TempDir dir("acceptance");
  Config cfg;
  cfg.seed = 10;
  write_trajectory(run_odometry(data.dataset, cfg).trajectory, dir / "a.txt");
  write_trajectory(run_odometry(data.dataset, cfg).trajectory, dir / "b.txt");
  const std::string a = test::read_text(dir / "a.txt"), b = test::read_text(dir / "b.txt");
  return {!a.empty() && a == b, fmt::format("{} bytes, files {}", a.size(), a == b ? "identical" : "differ")};
}

// 11. Evaluation metric examples.
Outcome evaluation_correctness() {
  const std::vector<double> lengths{10.0, 20.0, 40.0, 80.0};
  std::mt19937_64 rng(1100);
  Trajectory ref, scaled_ref, scaled_est;
  PoseSE3 pose;
  for (int i = 0; i < 600; ++i) {
    ref.push_back({0.1 * i, pose});
    pose = pose_compose(pose, {Vec3(0.3, 0.05 * test::random_vec(rng).x(), 0.0), rotation_exp(0.02 * test::random_vec(rng))});
  }
  for (int i = 0; i <= 1000; ++i) {
    scaled_ref.push_back({0.1 * i, {Vec3(0.1 * i, 0, 0), UnitQuaternion{}}});
    scaled_est.push_back({0.1 * i, {Vec3(0.101 * i, 0, 0), UnitQuaternion{}}});
  }
  Trajectory offset = ref;
  const PoseSE3 T{Vec3(50, -20, 3), UnitQuaternion::from_axis_angle(Vec3(1, 1, 2), 0.8)};
  for (auto& p : offset) p.pose = pose_compose(T, p.pose);

  const RelativeErrorTable same = evaluate_relative_errors(ref, ref, lengths);
  const RelativeErrorTable shifted = evaluate_relative_errors(offset, ref, lengths);
  const RelativeErrorTable scaled = evaluate_relative_errors(scaled_est, scaled_ref, lengths);
  // Identical translations cancel exactly; q^-1 q leaves round-off of order
  // 1e-17 deg/m in the rotation part.
  const bool ok_same = same.t_rel_pct == 0.0 && same.r_rel_deg_per_m < 1e-12;
  const bool ok_shift = shifted.t_rel_pct < 1e-9 && shifted.r_rel_deg_per_m < 1e-9;
  const bool ok_scale = std::abs(scaled.t_rel_pct - 1.0) <= 0.1;
  return {ok_same && ok_shift && ok_scale,
          fmt::format("identical {:.1e}% / {:.1e} deg/m; rigid offset {:.1e}% / {:.1e} deg/m; 1% scale t_rel "
                      "{:.4f}%",
                      same.t_rel_pct, same.r_rel_deg_per_m, shifted.t_rel_pct, shifted.r_rel_deg_per_m,
                      scaled.t_rel_pct)};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const std::vector<Criterion> criteria{
      {1, "gradient oracles", 10.0, gradient_oracles},
      {2, "Gaussian identities", 1.0, gaussian_identities},
      {3, "covariance recovery", 5.0, covariance_recovery},
      {4, "registration recovery", 30.0, registration_recovery},
      {5, "multi-hypothesis robustness", 0.0, multi_hypothesis},
      {6, "EKF linearization", 0.0, ekf_linearization},
      {7, "filter consistency", 120.0, filter_consistency},
      {8, "egovelocity", 0.0, egovelocity},
      {9, "end-to-end", 0.0, end_to_end},
      {10, "determinism", 0.0, determinism},
      {11, "evaluation correctness", 0.0, evaluation_correctness},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, fmt::format("exception: {}", e.what())};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt::format("{:.2f} s", seconds);
    if (c.time_limit_s > 0.0) {
      timing += fmt::format(" (<{:g} s)", c.time_limit_s);
      out.pass = out.pass && seconds < c.time_limit_s;
    }
    fmt::print("{} [{:>2}] {}: {}; {}\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail, timing);
    std::fflush(stdout);
    failures += !out.pass;
  }
  fmt::print("{}/{} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
