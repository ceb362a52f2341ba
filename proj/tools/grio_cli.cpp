// Command-line front end: run | synth | eval | fit.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "grio/config.hpp"
#include "grio/dataset.hpp"
#include "grio/evaluation.hpp"
#include "grio/odometry.hpp"
#include "grio/synthetic.hpp"
#include "grio/trajectory.hpp"

namespace fs = std::filesystem;

namespace {

struct ConfigFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
};

void add_config_flags(CLI::App& app, ConfigFlags& flags) {
  app.add_option("--config", flags.config_file, "key = value configuration file")
      ->check(CLI::ExistingFile);
  for (const auto& key : grio::config_keys()) {
    flags.options[key.name] =
        app.add_option("--" + key.name, flags.values[key.name], key.help)->group("Configuration");
  }
}

grio::Config resolve_config(const ConfigFlags& flags) {
  grio::Config cfg = flags.config_file.empty() ? grio::Config{} : grio::load_config(flags.config_file);
  for (const auto& [name, opt] : flags.options) {
    if (opt->count() > 0) grio::set_config_value(cfg, name, flags.values.at(name));
  }
  grio::validate_config(cfg);
  return cfg;
}

int cmd_run(const std::string& dataset_dir, const std::string& output, const grio::Config& cfg) {
  const grio::Dataset ds = grio::load_dataset(dataset_dir, cfg.doppler_sign);
  const grio::OdometryResult res = grio::run_odometry(ds, cfg);
  grio::write_trajectory(res.trajectory, output);
  const auto& s = res.stats;
  std::cout << fmt::format(
      "scans {}  keyframes {}  egovel updates {} (gated {}, failed {})  scan-match updates {} "
      "(gated {}, rejected {})\n",
      s.scans, s.keyframes, s.egovel_updates, s.egovel_gated, s.egovel_failures,
      s.scanmatch_updates, s.scanmatch_gated, s.scanmatch_rejected);
  if (ds.groundtruth && !res.trajectory.empty()) {
    std::cout << fmt::format("ATE (aligned) {:.4f} m\n",
                             grio::absolute_trajectory_error(res.trajectory, *ds.groundtruth,
                                                             cfg.eval_max_gap));
  }
  return 0;
}

int cmd_synth(const std::string& out_dir, const grio::Config& cfg) {
  const grio::SyntheticData data = grio::generate_synthetic(cfg.synth, cfg.seed);
  grio::write_dataset(data.dataset, out_dir);
  std::cout << fmt::format("wrote {} IMU samples and {} scans to {}\n", data.dataset.imu.size(),
                           data.dataset.scans.size(), out_dir);
  return 0;
}

int cmd_eval(const std::string& est_path, const std::string& ref_path, const std::string& csv_path,
             const std::string& axes_path, const grio::Config& cfg) {
  const grio::Trajectory est = grio::read_trajectory(est_path);
  const grio::Trajectory ref = grio::read_trajectory(ref_path);
  const grio::RelativeErrorTable table =
      grio::evaluate_relative_errors(est, ref, cfg.eval_lengths, cfg.eval_max_gap);
  std::cout << grio::format_table(table);
  std::cout << fmt::format("ATE (aligned) {:.4f} m\n",
                           grio::absolute_trajectory_error(est, ref, cfg.eval_max_gap));
  if (!csv_path.empty()) {
    std::ofstream out(csv_path, std::ios::binary);
    out << grio::format_csv(table);
    if (!out) throw std::runtime_error("cannot write " + csv_path);
  }
  if (!axes_path.empty()) {
    grio::write_axis_dump(grio::associate(est, ref, cfg.eval_max_gap), axes_path);
  }
  return 0;
}

int cmd_fit(const std::string& scan_path, const std::string& output, bool all_points,
            const grio::Config& cfg) {
  const grio::RadarScan scan = grio::load_scan_file(scan_path, cfg.doppler_sign);
  if (scan.points.empty()) throw std::runtime_error(scan_path + ": scan has no points");
  std::vector<bool> mask(scan.points.size(), true);
  if (!all_points) {
    grio::RansacConfig ransac = cfg.ransac;
    ransac.seed = cfg.seed;
    if (const auto est = grio::estimate_egovelocity(scan, ransac)) {
      mask = est->inlier_mask;
      std::cout << fmt::format("egovelocity {:.3f} {:.3f} {:.3f} m/s, {} of {} points static\n",
                               est->v_body.x(), est->v_body.y(), est->v_body.z(),
                               est->inlier_count(), scan.points.size());
    } else {
      spdlog::warn("egovelocity estimation failed, fitting all points");
    }
  }
  const std::vector<grio::Vec3> cloud = grio::select_points(scan, mask);
  const grio::GaussianModel model = grio::fit_keyframe_model(cloud, cfg, cfg.seed);
  grio::write_model(model, output);
  std::cout << fmt::format("fitted {} Gaussians to {} points -> {}\n", model.size(), cloud.size(),
                           output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian radar-inertial odometry"};
  app.require_subcommand(1);
  ConfigFlags run_flags, synth_flags, eval_flags, fit_flags, show_flags;

  std::string dataset_dir, output = "trajectory.txt";
  auto* run = app.add_subcommand("run", "Run odometry on a dataset directory");
  run->add_option("dataset", dataset_dir, "dataset root")->required()->check(CLI::ExistingDirectory);
  run->add_option("-o,--output", output, "trajectory output file");
  add_config_flags(*run, run_flags);

  std::string synth_dir;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("output", synth_dir, "dataset root to create")->required();
  add_config_flags(*synth, synth_flags);

  std::string est_path, ref_path, csv_path, axes_path;
  auto* eval = app.add_subcommand("eval", "Relative translation/rotation errors of a trajectory");
  eval->add_option("estimate", est_path, "estimated trajectory")->required()->check(CLI::ExistingFile);
  eval->add_option("reference", ref_path, "reference trajectory")->required()->check(CLI::ExistingFile);
  eval->add_option("--csv", csv_path, "write length,t_rel_pct,r_rel_deg_per_m CSV");
  eval->add_option("--dump-axes", axes_path, "write associated per-axis positions");
  add_config_flags(*eval, eval_flags);

  std::string scan_path, model_out = "model.txt";
  bool all_points = false;
  auto* fit = app.add_subcommand("fit", "Fit a Gaussian model to one scan file");
  fit->add_option("scan", scan_path, "scan CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("-o,--output", model_out, "model dump file");
  fit->add_flag("--all-points", all_points, "skip the Doppler outlier filter");
  add_config_flags(*fit, fit_flags);

  auto* show = app.add_subcommand("config", "Print the effective configuration");
  add_config_flags(*show, show_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(dataset_dir, output, resolve_config(run_flags));
    if (*synth) return cmd_synth(synth_dir, resolve_config(synth_flags));
    if (*eval) {
      return cmd_eval(est_path, ref_path, csv_path, axes_path, resolve_config(eval_flags));
    }
    if (*fit) return cmd_fit(scan_path, model_out, all_points, resolve_config(fit_flags));
    if (*show) {
      std::cout << grio::dump_config(resolve_config(show_flags));
      return 0;
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
