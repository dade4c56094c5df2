#pragma once

// Metrics and report structures: per-method marker error tables and the
// sequence-length sweep summary.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "serp/common.hpp"

namespace serp {

// Mean over markers of the Euclidean prediction error, reported as
// mean +- std over timesteps (population std), in mm. The literal mean
// squared error is kept alongside.
struct ErrorReport {
  double mean_mm = 0.0;
  double std_mm = 0.0;
  double mse_mm2 = 0.0;              // mean squared coordinate error
  Vec per_marker_mean_mm;            // length 9
  Eigen::Index samples = 0;
};

// pred, truth: T x 27 marker coordinate series in mm.
inline ErrorReport marker_error(const Mat& pred, const Mat& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
    throw ShapeError("marker_error: shape mismatch");
  if (pred.cols() % 3 != 0) throw ShapeError("marker_error: columns not divisible by 3");
  const Eigen::Index t_len = pred.rows();
  const Eigen::Index markers = pred.cols() / 3;

  ErrorReport r;
  r.samples = t_len;
  r.per_marker_mean_mm = Vec::Zero(markers);
  Vec per_step(t_len);
  for (Eigen::Index t = 0; t < t_len; ++t) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < markers; ++k) {
      const double d = (pred.block(t, 3 * k, 1, 3) - truth.block(t, 3 * k, 1, 3)).norm();
      acc += d;
      r.per_marker_mean_mm[k] += d;
    }
    per_step[t] = acc / static_cast<double>(markers);
  }
  r.per_marker_mean_mm /= static_cast<double>(t_len);
  r.mean_mm = per_step.mean();
  r.std_mm = std::sqrt((per_step.array() - r.mean_mm).square().mean());
  r.mse_mm2 = (pred - truth).squaredNorm() / static_cast<double>(pred.size());
  return r;
}

// Per-method comparison on a shared test series, rows ordered by method
// name so reports are deterministic.
struct ComparisonTable {
  std::map<std::string, ErrorReport> rows;

  std::string format() const {
    std::string out = "method          mean_mm   std_mm    mse_mm2\n";
    char buf[128];
    for (const auto& [name, r] : rows) {
      std::snprintf(buf, sizeof(buf), "%-14s %8.3f %8.3f %10.3f\n", name.c_str(), r.mean_mm,
                    r.std_mm, r.mse_mm2);
      out += buf;
    }
    return out;
  }
};

inline ComparisonTable compare_methods(const std::map<std::string, Mat>& predictions,
                                       const Mat& truth) {
  ComparisonTable table;
  for (const auto& [name, pred] : predictions) table.rows[name] = marker_error(pred, truth);
  return table;
}

struct SweepPoint {
  int window = 0;
  double val_loss = 0.0;
  bool diverged = false;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  int best_window = 0;

  void finalize() {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
      if (!p.diverged && p.val_loss < best) {
        best = p.val_loss;
        best_window = p.window;
      }
    }
  }
};

}  // namespace serp
