#pragma once

// Analytical pose baseline: recover the initial joint angles from the
// first marker frame, then integrate motor angle displacements through
// the coupling inverse, predicting markers by forward kinematics. No
// learning and no filtering, so every unmodeled flexibility effect
// accumulates as error.

#include "serp/kinematics.hpp"
#include "serp/plant.hpp"

namespace serp {

// One predicted 27-vector per logged step.
inline Mat analytical_estimate(const SessionLog& log, const ArmGeometry& geometry) {
  if (log.steps() < 1) throw InsufficientDataError("analytical_estimate: empty log");

  MarkerSet first = MarkerSet::from_flat(log.markers.row(0).transpose());
  Vec q = joints_from_markers(first, geometry);
  Vec motor_prev = log.sensors.row(0).head(kNumJoints).transpose();

  Mat predictions(log.steps(), kMarkerDim);
  predictions.row(0) = forward_kinematics(q, geometry).flatten();
  for (Eigen::Index t = 1; t < log.steps(); ++t) {
    Vec motor = log.sensors.row(t).head(kNumJoints).transpose();
    q += motor_to_joint(motor - motor_prev);
    motor_prev = motor;
    Vec clamped = q.cwiseMax(-kPi).cwiseMin(kPi);
    predictions.row(t) = forward_kinematics(clamped, geometry).flatten();
  }
  return predictions;
}

}  // namespace serp
