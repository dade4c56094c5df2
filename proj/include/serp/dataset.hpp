#pragma once

// Turns session logs into supervised learning tensors: session splits,
// per-channel normalization to (-1, 1) fitted on the training split
// only, and the delay-embedded reservoir vector construction.

#include <cmath>
#include <utility>
#include <vector>

#include "serp/common.hpp"
#include "serp/plant.hpp"

namespace serp {

inline constexpr int kTotalChannels = kSensorDim + kCommandDim + kMarkerDim;  // 54

struct SplitIndices {
  std::vector<int> train, val, test;
};

// Deterministic split by session index in the 20/2/1 proportion of the
// data-collection protocol, scaled to the session count.
inline SplitIndices split_sessions(int num_sessions) {
  if (num_sessions < 3)
    throw InsufficientDataError("split_sessions: need at least 3 sessions");
  int val = std::max(1, static_cast<int>(std::lround(num_sessions * 2.0 / 23.0)));
  int test = std::max(1, static_cast<int>(std::lround(num_sessions * 1.0 / 23.0)));
  int train = num_sessions - val - test;
  SplitIndices s;
  for (int i = 0; i < train; ++i) s.train.push_back(i);
  for (int i = train; i < train + val; ++i) s.val.push_back(i);
  for (int i = train + val; i < num_sessions; ++i) s.test.push_back(i);
  return s;
}

// Drops the first `burnin` transient steps of a session.
inline SessionLog discard_burnin(const SessionLog& log, int burnin) {
  if (burnin >= log.steps())
    throw InsufficientDataError("discard_burnin: burnin >= session length");
  SessionLog out = log;
  Eigen::Index keep = log.steps() - burnin;
  out.sensors = log.sensors.bottomRows(keep);
  out.commands = log.commands.bottomRows(keep);
  out.markers = log.markers.bottomRows(keep);
  return out;
}

// Per-channel affine map to (-1, 1) over all 54 channels: 18 sensor +
// 9 command + 27 target. The 2*(x-lo)/(hi-lo)-1 form keeps training
// data inside [-1, 1] exactly under floating-point rounding. Constant
// channels map to 0 with unit span.
struct Normalizer {
  Vec lo = Vec::Constant(kTotalChannels, -1.0);
  Vec hi = Vec::Constant(kTotalChannels, 1.0);

  double normalize_one(double x, int channel) const {
    return 2.0 * (x - lo[channel]) / (hi[channel] - lo[channel]) - 1.0;
  }
  double denormalize_one(double y, int channel) const {
    return (y + 1.0) * 0.5 * (hi[channel] - lo[channel]) + lo[channel];
  }

  // block: columns [offset, offset+width) of the channel table
  Mat normalize(const Mat& data, int offset) const {
    Mat out = data;
    for (Eigen::Index c = 0; c < data.cols(); ++c)
      out.col(c) =
          2.0 * (data.col(c).array() - lo[offset + c]) / (hi[offset + c] - lo[offset + c]) - 1.0;
    return out;
  }
  Mat denormalize(const Mat& data, int offset) const {
    Mat out = data;
    for (Eigen::Index c = 0; c < data.cols(); ++c)
      out.col(c) =
          (data.col(c).array() + 1.0) * 0.5 * (hi[offset + c] - lo[offset + c]) + lo[offset + c];
    return out;
  }
};

inline constexpr int kSensorOffset = 0;
inline constexpr int kCommandOffset = kSensorDim;
inline constexpr int kMarkerOffset = kSensorDim + kCommandDim;

inline Normalizer fit_normalizer(const std::vector<SessionLog>& train_logs) {
  if (train_logs.empty()) throw InsufficientDataError("fit_normalizer: no training data");
  Vec lo = Vec::Constant(kTotalChannels, std::numeric_limits<double>::infinity());
  Vec hi = Vec::Constant(kTotalChannels, -std::numeric_limits<double>::infinity());
  for (const SessionLog& log : train_logs) {
    for (int c = 0; c < kSensorDim; ++c) {
      lo[c] = std::min(lo[c], log.sensors.col(c).minCoeff());
      hi[c] = std::max(hi[c], log.sensors.col(c).maxCoeff());
    }
    for (int c = 0; c < kCommandDim; ++c) {
      lo[kCommandOffset + c] = std::min(lo[kCommandOffset + c], log.commands.col(c).minCoeff());
      hi[kCommandOffset + c] = std::max(hi[kCommandOffset + c], log.commands.col(c).maxCoeff());
    }
    for (int c = 0; c < kMarkerDim; ++c) {
      lo[kMarkerOffset + c] = std::min(lo[kMarkerOffset + c], log.markers.col(c).minCoeff());
      hi[kMarkerOffset + c] = std::max(hi[kMarkerOffset + c], log.markers.col(c).maxCoeff());
    }
  }
  Normalizer n;
  for (int c = 0; c < kTotalChannels; ++c) {
    if (hi[c] > lo[c]) {
      n.lo[c] = lo[c];
      n.hi[c] = hi[c];
    } else {
      // constant channel: map to 0 with unit span
      n.lo[c] = lo[c] - 1.0;
      n.hi[c] = lo[c] + 1.0;
    }
  }
  return n;
}

struct SupervisedSet {
  Mat inputs;   // N x (27H - 9), or N x (18H - 9) without loads
  Mat targets;  // N x 27, normalized
  std::vector<std::pair<int, int>> provenance;  // (session, step) per row
  int window = 1;
  bool include_loads = true;

  void append(const SupervisedSet& other) {
    if (inputs.size() == 0) {
      *this = other;
      return;
    }
    if (other.inputs.cols() != inputs.cols()) throw ShapeError("SupervisedSet::append: width");
    Eigen::Index n = inputs.rows();
    inputs.conservativeResize(n + other.inputs.rows(), Eigen::NoChange);
    targets.conservativeResize(n + other.targets.rows(), Eigen::NoChange);
    inputs.bottomRows(other.inputs.rows()) = other.inputs;
    targets.bottomRows(other.targets.rows()) = other.targets;
    provenance.insert(provenance.end(), other.provenance.begin(), other.provenance.end());
  }
};

inline int embed_dim(int window, bool include_loads = true) {
  int sensor = include_loads ? kSensorDim : kNumJoints;
  return sensor * window + kCommandDim * (window - 1);
}

// Delay-embedded reservoir vector per step t >= H-1:
//   x_t = (s_t, ..., s_{t-H+1}, u_{t-1}, ..., u_{t-H+1})
// The current command u_t does not affect y_t and is excluded. Windows
// never cross session boundaries; the first H-1 steps are dropped.
// With include_loads=false the 9 load channels are removed from s.
inline SupervisedSet embed(const SessionLog& log, int window, const Normalizer& norm,
                           int session_index = 0, bool include_loads = true) {
  if (window < 1) throw WindowError("embed: window must be >= 1");
  const Eigen::Index t_len = log.steps();
  if (t_len < window) throw WindowError("embed: log shorter than window");

  const int sensor_dim = include_loads ? kSensorDim : kNumJoints;
  Mat s = norm.normalize(log.sensors, kSensorOffset);
  Mat u = norm.normalize(log.commands, kCommandOffset);
  Mat y = norm.normalize(log.markers, kMarkerOffset);

  SupervisedSet out;
  out.window = window;
  out.include_loads = include_loads;
  const Eigen::Index n = t_len - window + 1;
  out.inputs.resize(n, embed_dim(window, include_loads));
  out.targets.resize(n, kMarkerDim);
  out.provenance.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index t = window - 1; t < t_len; ++t) {
    Eigen::Index row = t - (window - 1);
    Eigen::Index col = 0;
    for (int k = 0; k < window; ++k) {
      out.inputs.block(row, col, 1, sensor_dim) = s.row(t - k).leftCols(sensor_dim);
      col += sensor_dim;
    }
    for (int k = 1; k < window; ++k) {
      out.inputs.block(row, col, 1, kCommandDim) = u.row(t - k);
      col += kCommandDim;
    }
    out.targets.row(row) = y.row(t);
    out.provenance.emplace_back(session_index, static_cast<int>(t));
  }
  return out;
}

// Sequence view for the recurrent baseline: per step a window of H
// frames (s_k, u_k) in R^27, oldest first, with the final frame's
// command zeroed (u_t does not affect y_t). Rows are flattened H x 27.
inline SupervisedSet lstm_sequences(const SessionLog& log, int window, const Normalizer& norm,
                                    int session_index = 0) {
  if (window < 1) throw WindowError("lstm_sequences: window must be >= 1");
  const Eigen::Index t_len = log.steps();
  if (t_len < window) throw WindowError("lstm_sequences: log shorter than window");

  Mat s = norm.normalize(log.sensors, kSensorOffset);
  Mat u = norm.normalize(log.commands, kCommandOffset);
  Mat y = norm.normalize(log.markers, kMarkerOffset);

  const int frame = kSensorDim + kCommandDim;  // 27
  SupervisedSet out;
  out.window = window;
  const Eigen::Index n = t_len - window + 1;
  out.inputs.resize(n, static_cast<Eigen::Index>(window) * frame);
  out.targets.resize(n, kMarkerDim);
  out.provenance.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index t = window - 1; t < t_len; ++t) {
    Eigen::Index row = t - (window - 1);
    for (int k = 0; k < window; ++k) {
      Eigen::Index step = t - (window - 1) + k;
      Eigen::Index col = static_cast<Eigen::Index>(k) * frame;
      out.inputs.block(row, col, 1, kSensorDim) = s.row(step);
      if (k == window - 1)
        out.inputs.block(row, col + kSensorDim, 1, kCommandDim).setZero();
      else
        out.inputs.block(row, col + kSensorDim, 1, kCommandDim) = u.row(step);
    }
    out.targets.row(row) = y.row(t);
    out.provenance.emplace_back(session_index, static_cast<int>(t));
  }
  return out;
}

}  // namespace serp
