#pragma once

// Coupling algebra between motor and joint velocity spaces of the
// cable-driven serpentine arm, plus forward kinematics from joint
// angles to the 3D marker positions used as the pose representation.
//
// Cable routing couples the motors: motor j drives joints 1..j, so the
// joint-to-motor velocity map is the lower-triangular ones matrix A and
// its inverse takes first differences.

#include <cmath>
#include <vector>

#include "serp/common.hpp"

namespace serp {

// Lower-triangular ones matrix relating joint velocities to motor
// velocities. Its inverse is bidiagonal (1 on the diagonal, -1 on the
// first subdiagonal), which motor_to_joint exploits directly.
inline Mat coupling_matrix(int n) {
  if (n < 1) throw InvalidDimensionError("coupling_matrix: n must be >= 1");
  Mat a = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) a(i, j) = 1.0;
  return a;
}

// Motor j velocity = cumulative sum of joint velocities 1..j (A * jv).
inline Vec joint_to_motor(const Vec& joint_vel) {
  require_finite(joint_vel, "joint_to_motor");
  Vec motor(joint_vel.size());
  double acc = 0.0;
  for (Eigen::Index j = 0; j < joint_vel.size(); ++j) {
    acc += joint_vel[j];
    motor[j] = acc;
  }
  return motor;
}

// Joint j velocity = motor j velocity - motor j-1 velocity (motor 0 = 0).
// Exact inverse of joint_to_motor.
inline Vec motor_to_joint(const Vec& motor_vel) {
  require_finite(motor_vel, "motor_to_joint");
  Vec joint(motor_vel.size());
  double prev = 0.0;
  for (Eigen::Index j = 0; j < motor_vel.size(); ++j) {
    joint[j] = motor_vel[j] - prev;
    prev = motor_vel[j];
  }
  return joint;
}

enum class HingeAxis { X, Z };

// Geometry of the 9-link arm. Zero pose extends along base +Y; odd
// joints (1-based) hinge about local Z, even joints about local X, so
// consecutive axes are perpendicular. Units are mm.
struct ArmGeometry {
  std::vector<double> link_lengths;          // 9 lengths, mm
  std::vector<HingeAxis> joint_axes;         // alternating Z, X, Z, ...
  std::vector<Vec3> marker_offsets;          // per link, link frame, mm
  std::vector<double> pulley_radii;          // r_{0,j}, mm, decreasing by 2

  static ArmGeometry standard(double total_length_mm = 545.0,
                              double marker_offset_z_mm = 10.0) {
    ArmGeometry g;
    g.link_lengths.assign(kNumJoints, total_length_mm / kNumJoints);
    g.joint_axes.resize(kNumJoints);
    for (int j = 0; j < kNumJoints; ++j)
      g.joint_axes[j] = (j % 2 == 0) ? HingeAxis::Z : HingeAxis::X;
    g.marker_offsets.assign(kNumJoints, Vec3(0.0, 0.0, marker_offset_z_mm));
    g.pulley_radii.resize(kNumJoints);
    for (int j = 0; j < kNumJoints; ++j) g.pulley_radii[j] = 20.0 - 2.0 * j;
    return g;
  }

  int num_joints() const { return static_cast<int>(link_lengths.size()); }

  double total_length() const {
    double s = 0.0;
    for (double l : link_lengths) s += l;
    return s;
  }
};

// 9 marker positions in the base frame, mm; flattens to y in R^27.
struct MarkerSet {
  std::vector<Vec3> positions;

  Vec flatten() const {
    Vec y(3 * static_cast<Eigen::Index>(positions.size()));
    for (std::size_t i = 0; i < positions.size(); ++i)
      y.segment<3>(3 * static_cast<Eigen::Index>(i)) = positions[i];
    return y;
  }

  static MarkerSet from_flat(const Vec& y) {
    if (y.size() % 3 != 0) throw ShapeError("MarkerSet::from_flat: size not divisible by 3");
    MarkerSet m;
    m.positions.resize(static_cast<std::size_t>(y.size() / 3));
    for (std::size_t i = 0; i < m.positions.size(); ++i)
      m.positions[i] = y.segment<3>(3 * static_cast<Eigen::Index>(i));
    return m;
  }
};

namespace detail {

inline Eigen::Matrix3d hinge_rotation(HingeAxis axis, double angle) {
  Eigen::Vector3d u = (axis == HingeAxis::Z) ? Eigen::Vector3d::UnitZ()
                                             : Eigen::Vector3d::UnitX();
  return Eigen::AngleAxisd(angle, u).toRotationMatrix();
}

}  // namespace detail

// Composes the 9 hinge rotations, links chained tip-to-tail along local
// +Y. Marker k sits at link k's distal end plus its offset in the link
// frame. Throws RangeError for angles outside [-pi, pi].
inline MarkerSet forward_kinematics(const Vec& q, const ArmGeometry& g) {
  const int n = g.num_joints();
  if (q.size() != n) throw ShapeError("forward_kinematics: joint count mismatch");
  for (int j = 0; j < n; ++j)
    if (!(std::abs(q[j]) <= kPi))
      throw RangeError("forward_kinematics: joint angle outside [-pi, pi]");

  MarkerSet out;
  out.positions.resize(static_cast<std::size_t>(n));
  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
  Vec3 origin = Vec3::Zero();
  for (int j = 0; j < n; ++j) {
    rot = rot * detail::hinge_rotation(g.joint_axes[j], q[j]);
    Vec3 distal = origin + rot * Vec3(0.0, g.link_lengths[j], 0.0);
    out.positions[static_cast<std::size_t>(j)] = distal + rot * g.marker_offsets[j];
    origin = distal;
  }
  return out;
}

// Recovers joint angles from marker positions, one hinge at a time.
// At joint j the parent frame is already known, so the marker position
// expressed in that frame must be the rotation of the known link-local
// marker vector; projecting both onto the plane perpendicular to the
// hinge axis yields the angle. Fails when the projected component is
// degenerate (e.g. coincident markers).
inline Vec joints_from_markers(const MarkerSet& m, const ArmGeometry& g) {
  const int n = g.num_joints();
  if (static_cast<int>(m.positions.size()) != n)
    throw ShapeError("joints_from_markers: marker count mismatch");

  Vec q(n);
  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
  Vec3 origin = Vec3::Zero();
  for (int j = 0; j < n; ++j) {
    // Marker in link frame before this hinge's rotation is applied.
    Vec3 local = Vec3(0.0, g.link_lengths[j], 0.0) + g.marker_offsets[j];
    Vec3 observed = rot.transpose() * (m.positions[static_cast<std::size_t>(j)] - origin);

    // A hinge rotation preserves the marker's distance from the joint
    // origin; a large mismatch means no pose explains these markers.
    if (std::abs(observed.norm() - local.norm()) > 0.1 * local.norm())
      throw UnrecoverablePoseError("joints_from_markers: marker distance inconsistent at joint " +
                                   std::to_string(j + 1));

    int a, b;  // in-plane component indices for this hinge axis
    if (g.joint_axes[j] == HingeAxis::Z) {
      a = 0; b = 1;
    } else {
      a = 1; b = 2;
    }
    const double vx = local[a], vy = local[b];
    const double wx = observed[a], wy = observed[b];
    const double vn = std::hypot(vx, vy), wn = std::hypot(wx, wy);
    if (vn < 1e-9 || wn < 1e-9 * g.total_length())
      throw UnrecoverablePoseError("joints_from_markers: degenerate projected segment at joint " +
                                   std::to_string(j + 1));
    // Signed angle from v to w about the hinge axis.
    const double cross = vx * wy - vy * wx;
    const double dot = vx * wx + vy * wy;
    q[j] = std::atan2(cross, dot);

    rot = rot * detail::hinge_rotation(g.joint_axes[j], q[j]);
    origin += rot * Vec3(0.0, g.link_lengths[j], 0.0);
  }
  return q;
}

}  // namespace serp
