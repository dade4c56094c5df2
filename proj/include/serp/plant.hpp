#pragma once

// Simulated manipulator standing in for the hardware. Motors are
// velocity-driven; the true joint angles deviate from the ideal
// motor-implied ones through three flexibility effects:
//   - cable slack     -> backlash play operator per joint,
//   - cable elongation -> deflection proportional to gravity torque,
//   - link deformation -> Ornstein-Uhlenbeck noise per joint.
// These give the plant hysteretic memory and pose-dependent
// nonlinearity, which is what the learned readouts exploit.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "serp/common.hpp"
#include "serp/kinematics.hpp"

namespace serp {

inline constexpr double kGravityMmPerS2 = 9810.0;  // mm/s^2

struct PlantConfig {
  ArmGeometry geometry = ArmGeometry::standard();
  double backlash_width = 0.12;        // per-joint play width, rad
  double compliance_per_joint = 4e-5;  // rad per N*mm of gravity torque
  double deformation_sigma = 0.002;    // OU stationary std, rad
  double deformation_tau = 5.0;        // OU correlation time, s
  double load_noise_sigma = 0.1;       // dimensionless
  std::vector<double> link_masses_g = std::vector<double>(kNumJoints, 30.0);
  double quantization_step = deg2rad(0.088);  // motor angle resolution, rad
  double dt = 0.25;                    // control period, s (4 Hz)
  double p_gain = 1.0;                 // 1/s
  double max_motor_speed = 3.0;        // rad/s

  void validate() const {
    if (dt <= 0.0) throw std::invalid_argument("PlantConfig: dt must be > 0");
    if (backlash_width < 0 || compliance_per_joint < 0 || deformation_sigma < 0 ||
        deformation_tau <= 0 || load_noise_sigma < 0 || quantization_step < 0 ||
        max_motor_speed <= 0)
      throw std::invalid_argument("PlantConfig: physical parameters must be non-negative");
  }
};

struct PlantState {
  Vec motor_angles = Vec::Zero(kNumJoints);       // cumulative pulley angles, rad
  Vec joint_angles_true = Vec::Zero(kNumJoints);  // rad
  Vec hysteresis_centers = Vec::Zero(kNumJoints); // backlash memory, rad
  Vec deformation = Vec::Zero(kNumJoints);        // OU state, rad
  double time = 0.0;                              // s
};

struct SensorSample {
  Vec motor_angles = Vec::Zero(kNumJoints);  // quantized, rad
  Vec motor_loads = Vec::Zero(kNumJoints);   // dimensionless

  Vec flatten() const {
    Vec s(kSensorDim);
    s.head(kNumJoints) = motor_angles;
    s.tail(kNumJoints) = motor_loads;
    return s;
  }
};

// One session's worth of logged data: sensors s_t, commands u_t and
// ground-truth markers y_t, one row per control step.
struct SessionLog {
  Mat sensors;   // T x 18
  Mat commands;  // T x 9
  Mat markers;   // T x 27
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;

  Eigen::Index steps() const { return sensors.rows(); }
};

// Classic play (backlash) operator: the output stays put while the
// input moves inside a dead zone of the given width and is dragged
// along once the input reaches either edge.
inline double play_operator(double prev_output, double input, double width) {
  const double half = width / 2.0;
  if (input - half > prev_output) return input - half;
  if (input + half < prev_output) return input + half;
  return prev_output;
}

namespace detail {

// Gravity torque about each joint's axis from the distal link masses,
// N*mm, evaluated at the given joint angles. Gravity points along +X.
inline Vec gravity_torques(const Vec& q, const PlantConfig& cfg) {
  const ArmGeometry& g = cfg.geometry;
  const int n = g.num_joints();

  std::vector<Eigen::Matrix3d> rot(static_cast<std::size_t>(n));
  std::vector<Vec3> joint_origin(static_cast<std::size_t>(n));
  std::vector<Vec3> com(static_cast<std::size_t>(n));
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  Vec3 origin = Vec3::Zero();
  for (int j = 0; j < n; ++j) {
    joint_origin[static_cast<std::size_t>(j)] = origin;
    r = r * hinge_rotation(g.joint_axes[j], q[j]);
    rot[static_cast<std::size_t>(j)] = r;
    Vec3 distal = origin + r * Vec3(0.0, g.link_lengths[j], 0.0);
    com[static_cast<std::size_t>(j)] = 0.5 * (origin + distal);
    origin = distal;
  }

  const Vec3 gravity_dir(1.0, 0.0, 0.0);
  Vec tau = Vec::Zero(n);
  for (int j = 0; j < n; ++j) {
    Vec3 axis_local = (g.joint_axes[j] == HingeAxis::Z) ? Vec3(Vec3::UnitZ()) : Vec3(Vec3::UnitX());
    Vec3 axis = rot[static_cast<std::size_t>(j)] * axis_local;
    for (int i = j; i < n; ++i) {
      const double force_n = cfg.link_masses_g[i] * 1e-3 * kGravityMmPerS2 * 1e-3;  // N
      Vec3 arm = com[static_cast<std::size_t>(i)] - joint_origin[static_cast<std::size_t>(j)];
      tau[j] += arm.cross(force_n * gravity_dir).dot(axis);  // N*mm
    }
  }
  return tau;
}

}  // namespace detail

// Synthetic per-motor load: the gravity torque motor j must hold at its
// joint, scaled by the motor pulley radius, plus Gaussian noise. Joint j
// carries every link from j outward, so proximal motors see more mass.
inline Vec load_model(const PlantState& state, const PlantConfig& cfg, std::mt19937_64& rng) {
  Vec tau = detail::gravity_torques(state.joint_angles_true, cfg);
  std::normal_distribution<double> noise(0.0, cfg.load_noise_sigma);
  Vec load(kNumJoints);
  for (int j = 0; j < kNumJoints; ++j)
    load[j] = std::abs(tau[j]) / cfg.geometry.pulley_radii[j] + noise(rng);
  return load;
}

struct StepResult {
  SensorSample sensors;
  MarkerSet markers;
};

// Advances the plant one control period under a motor velocity command.
inline StepResult step(PlantState& state, const Vec& target_motor_velocities,
                       const PlantConfig& cfg, std::mt19937_64& rng) {
  if (!target_motor_velocities.allFinite())
    throw std::invalid_argument("plant step: non-finite command rejected");
  if (target_motor_velocities.size() != kNumJoints)
    throw ShapeError("plant step: command must have 9 entries");

  state.motor_angles += target_motor_velocities * cfg.dt;
  state.time += cfg.dt;

  // Ideal commanded joint angles implied by the cumulative motor angles.
  Vec commanded = motor_to_joint(state.motor_angles);

  // Slack: each joint follows its command through a play operator.
  for (int j = 0; j < kNumJoints; ++j)
    state.hysteresis_centers[j] =
        play_operator(state.hysteresis_centers[j], commanded[j], cfg.backlash_width);

  // Deformation: exact OU discretization over one control period.
  const double decay = std::exp(-cfg.dt / cfg.deformation_tau);
  const double diffuse = cfg.deformation_sigma * std::sqrt(1.0 - decay * decay);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (int j = 0; j < kNumJoints; ++j)
    state.deformation[j] = state.deformation[j] * decay + diffuse * unit(rng);

  // Elongation: sag proportional to the gravity torque at the
  // pre-compliance pose.
  Vec tau = detail::gravity_torques(state.hysteresis_centers + state.deformation, cfg);

  for (int j = 0; j < kNumJoints; ++j) {
    double q = state.hysteresis_centers[j] + cfg.compliance_per_joint * tau[j] +
               state.deformation[j];
    state.joint_angles_true[j] = std::clamp(q, -kPi, kPi);
  }

  StepResult out;
  out.markers = forward_kinematics(state.joint_angles_true, cfg.geometry);
  if (cfg.quantization_step > 0.0) {
    out.sensors.motor_angles =
        (state.motor_angles / cfg.quantization_step).array().round() * cfg.quantization_step;
  } else {
    out.sensors.motor_angles = state.motor_angles;
  }
  out.sensors.motor_loads = load_model(state, cfg, rng);
  return out;
}

// P control on the motor-implied joint estimates (the hardware has no
// joint encoders), mapped to motor space and clamped per motor.
inline Vec p_controller(const Vec& current_joints, const Vec& target_joints,
                        const PlantConfig& cfg) {
  Vec joint_vel = cfg.p_gain * (target_joints - current_joints);
  Vec motor_vel = joint_to_motor(joint_vel);
  return motor_vel.cwiseMax(-cfg.max_motor_speed).cwiseMin(cfg.max_motor_speed);
}

// Random-motion data collection: uniform joint targets redrawn every
// `target_refresh` steps, odd joints in (-22.5, 22.5) deg and even
// joints in (0, 22.5) deg, driven by the P controller.
inline SessionLog run_session(const PlantConfig& cfg, std::uint64_t session_seed, int steps,
                              int target_refresh = 5) {
  cfg.validate();
  if (steps < target_refresh) throw std::invalid_argument("run_session: steps < target_refresh");

  std::mt19937_64 rng(session_seed);
  std::uniform_real_distribution<double> odd_range(deg2rad(-22.5), deg2rad(22.5));
  std::uniform_real_distribution<double> even_range(0.0, deg2rad(22.5));

  PlantState state;
  SessionLog log;
  log.sensors.resize(steps, kSensorDim);
  log.commands.resize(steps, kCommandDim);
  log.markers.resize(steps, kMarkerDim);
  log.seed = session_seed;

  Vec target = Vec::Zero(kNumJoints);
  for (int t = 0; t < steps; ++t) {
    if (t % target_refresh == 0) {
      for (int j = 0; j < kNumJoints; ++j)
        target[j] = (j % 2 == 0) ? odd_range(rng) : even_range(rng);
    }
    Vec estimated_joints = motor_to_joint(state.motor_angles);
    Vec cmd = p_controller(estimated_joints, target, cfg);
    StepResult r = step(state, cmd, cfg, rng);
    log.sensors.row(t) = r.sensors.flatten();
    log.commands.row(t) = cmd;
    log.markers.row(t) = r.markers.flatten();
  }
  return log;
}

}  // namespace serp
