#pragma once

#include <cstdint>
#include <vector>

#include "grio/config.hpp"
#include "grio/dataset.hpp"

namespace grio {

/// Ground-truth kinematics at one instant.
struct MotionSample {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();      // world
  Vec3 acceleration = Vec3::Zero();  // world
  UnitQuaternion attitude;           // world <- body
  Vec3 angular_rate = Vec3::Zero();  // body
};

/// Planar path followed with a smooth start from rest; the body frame's x
/// axis is the direction of travel and the trajectory starts at the identity
/// pose.
class SyntheticMotion {
 public:
  explicit SyntheticMotion(const SynthSpec& spec);
  MotionSample at(double t) const;
  double arc_length(double t) const;

 private:
  SynthSpec spec_;
};

/// Structured scene as a set of surface points (walls, floor patches,
/// pillars and boxes).
std::vector<Vec3> build_scene(const SynthSpec& spec);

struct SyntheticData {
  Dataset dataset;
  /// Scene points in the world frame.
  std::vector<Vec3> scene;
  /// Ground-truth biases used at every IMU sample.
  std::vector<Vec3> accel_bias;
  std::vector<Vec3> gyro_bias;
};

/// Simulated IMU and radar streams consistent with SyntheticMotion and the
/// scene. Ground truth is sampled at the radar timestamps. Deterministic for
/// a fixed spec and seed.
SyntheticData generate_synthetic(const SynthSpec& spec, std::uint64_t seed);

}  // namespace grio
