#pragma once

// Closed-form ridge regression for the linear readout. Also serves as
// the correctness oracle for gradient-trained linear readouts.

#include <Eigen/LU>

#include "serp/common.hpp"

namespace serp {

struct LinearReadout {
  Mat weights;  // input_dim x output_dim
  Vec bias;     // output_dim

  Mat predict(const Mat& x) const { return (x * weights).rowwise() + bias.transpose(); }
};

// Minimizes ||X~ W - Y||_F^2 + lambda ||W||_F^2 over the bias-augmented
// design matrix X~ = [X 1]. With lambda = 0 a rank-deficient normal
// matrix raises SingularityError.
inline LinearReadout ridge_fit(const Mat& x, const Mat& y, double lambda) {
  if (x.rows() < 1) throw InsufficientDataError("ridge_fit: empty data");
  if (x.rows() != y.rows()) throw ShapeError("ridge_fit: row count mismatch");
  if (lambda < 0.0) throw std::invalid_argument("ridge_fit: lambda must be >= 0");

  const Eigen::Index d = x.cols();
  Mat xt(x.rows(), d + 1);
  xt.leftCols(d) = x;
  xt.col(d).setOnes();

  Mat normal = xt.transpose() * xt;
  normal.diagonal().array() += lambda;
  Mat rhs = xt.transpose() * y;

  Mat solution;
  if (lambda == 0.0) {
    Eigen::FullPivLU<Mat> lu(normal);
    if (!lu.isInvertible())
      throw SingularityError("ridge_fit: singular normal matrix with lambda = 0");
    solution = lu.solve(rhs);
  } else {
    solution = normal.ldlt().solve(rhs);
  }

  LinearReadout out;
  out.weights = solution.topRows(d);
  out.bias = solution.row(d).transpose();
  return out;
}

}  // namespace serp
