#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "grio/gaussian_model.hpp"
#include "grio/synthetic.hpp"

namespace grio::test {

/// Random subset of the default corridor scene in front of the origin.
inline std::vector<Vec3> structured_cloud(std::uint64_t seed, std::size_t n = 512) {
  static const std::vector<Vec3> scene = build_scene(SynthSpec{});
  std::vector<Vec3> pool;
  for (const Vec3& p : scene) {
    if (p.x() > -4.0 && p.x() < 14.0) pool.push_back(p);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(std::min(n, pool.size()));
  return pool;
}

inline GaussianModel fit_scene_model(const std::vector<Vec3>& cloud, std::uint64_t seed,
                                     int epochs = 300) {
  const double s = std::log(0.05);
  FitOptions opt;
  opt.epochs = epochs;
  return fit_model(init_model(cloud, default_gaussian_count(cloud.size()), s, s, seed), cloud, opt)
      .model;
}

/// Cloud as seen from a sensor at `pose` in the model frame.
inline std::vector<Vec3> observe_from(const std::vector<Vec3>& cloud, const PoseSE3& pose) {
  std::vector<Vec3> out;
  out.reserve(cloud.size());
  for (const Vec3& p : cloud) out.push_back(pose.q.conjugate().rotate(p - pose.t));
  return out;
}

}  // namespace grio::test
