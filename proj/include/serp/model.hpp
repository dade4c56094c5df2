#pragma once

// Common surface for every trainable estimator. Inputs arrive as one
// row per sample; recurrent models interpret the row as a flattened
// frame sequence. Parameters are a single flat vector so the optimizer
// is model-agnostic.

#include "serp/common.hpp"

namespace serp {

class Model {
 public:
  virtual ~Model() = default;

  virtual int input_dim() const = 0;
  virtual int output_dim() const = 0;
  virtual Vec& params() = 0;
  virtual const Vec& params() const = 0;
  virtual void init_weights(std::uint64_t seed) = 0;

  virtual Mat predict(const Mat& x) const = 0;

  // Returns mean squared error over (batch x output) entries and fills
  // `grad` with its gradient with respect to the flat parameters.
  virtual double loss_and_grad(const Mat& x, const Mat& y, Vec& grad) const = 0;

  double mse(const Mat& x, const Mat& y) const {
    Mat pred = predict(x);
    return (pred - y).squaredNorm() / (static_cast<double>(y.rows()) * y.cols());
  }
};

}  // namespace serp
