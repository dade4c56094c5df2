#pragma once

// Fully connected readout with tanh hidden layers and a linear output.
// Parameters live in one flat vector so the same optimizer and training
// loop drive every model; layers are Eigen maps into that vector.

#include <random>
#include <vector>

#include "serp/model.hpp"

namespace serp {

class MlpReadout : public Model {
 public:
  // dims: [input, hidden..., output]; e.g. {99, 512, 512, 512, 27} is
  // the four-weight-layer readout.
  explicit MlpReadout(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2) throw ShapeError("MlpReadout: need at least input and output dims");
    Eigen::Index total = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l)
      total += static_cast<Eigen::Index>(dims_[l]) * dims_[l + 1] + dims_[l + 1];
    params_ = Vec::Zero(total);
  }

  static MlpReadout standard(int input_dim, int width = 512, int hidden_layers = 3,
                             int output_dim = kMarkerDim) {
    std::vector<int> dims;
    dims.push_back(input_dim);
    for (int l = 0; l < hidden_layers; ++l) dims.push_back(width);
    dims.push_back(output_dim);
    return MlpReadout(std::move(dims));
  }

  int input_dim() const override { return dims_.front(); }
  int output_dim() const override { return dims_.back(); }
  const std::vector<int>& dims() const { return dims_; }
  Vec& params() override { return params_; }
  const Vec& params() const override { return params_; }

  // Uniform init scaled by 1/sqrt(fan_in), zero biases.
  void init_weights(std::uint64_t seed) override {
    std::mt19937_64 rng(seed);
    Eigen::Index off = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
      const Eigen::Index wn = static_cast<Eigen::Index>(dims_[l]) * dims_[l + 1];
      const double scale = 1.0 / std::sqrt(static_cast<double>(dims_[l]));
      std::uniform_real_distribution<double> d(-scale, scale);
      for (Eigen::Index i = 0; i < wn; ++i) params_[off + i] = d(rng);
      off += wn;
      params_.segment(off, dims_[l + 1]).setZero();
      off += dims_[l + 1];
    }
  }

  Mat predict(const Mat& x) const override {
    if (x.cols() != dims_.front()) throw ShapeError("MlpReadout::predict: input dim mismatch");
    Mat a = x;
    Eigen::Index off = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
      auto [w, b] = layer(l, off);
      a = (a * w).rowwise() + b.transpose();
      if (l + 2 < dims_.size()) a = a.array().tanh();
      off += static_cast<Eigen::Index>(dims_[l]) * dims_[l + 1] + dims_[l + 1];
    }
    return a;
  }

  // Mean squared error over (batch x output) entries and its exact
  // gradient with respect to the flat parameter vector.
  double loss_and_grad(const Mat& x, const Mat& y, Vec& grad) const override {
    if (x.rows() == 0) throw ShapeError("MlpReadout::loss_and_grad: empty batch");
    const std::size_t layers = dims_.size() - 1;
    std::vector<Mat> act(layers + 1);
    act[0] = x;
    Eigen::Index off = 0;
    std::vector<Eigen::Index> offsets(layers);
    for (std::size_t l = 0; l < layers; ++l) {
      offsets[l] = off;
      auto [w, b] = layer(l, off);
      act[l + 1] = ((act[l] * w).rowwise() + b.transpose());
      if (l + 1 < layers) act[l + 1] = act[l + 1].array().tanh();
      off += static_cast<Eigen::Index>(dims_[l]) * dims_[l + 1] + dims_[l + 1];
    }

    const double denom = static_cast<double>(x.rows()) * dims_.back();
    Mat residual = act[layers] - y;
    const double loss = residual.squaredNorm() / denom;

    grad.setZero(params_.size());
    Mat delta = (2.0 / denom) * residual;
    for (std::size_t l = layers; l-- > 0;) {
      const Eigen::Index wn = static_cast<Eigen::Index>(dims_[l]) * dims_[l + 1];
      Eigen::Map<Mat> gw(grad.data() + offsets[l], dims_[l], dims_[l + 1]);
      Eigen::Map<Vec> gb(grad.data() + offsets[l] + wn, dims_[l + 1]);
      gw = act[l].transpose() * delta;
      gb = delta.colwise().sum();
      if (l > 0) {
        Eigen::Index dummy = offsets[l];
        auto [w, b] = layer(l, dummy);
        delta = (delta * w.transpose()).cwiseProduct(
            (1.0 - act[l].array().square()).matrix());
      }
    }
    return loss;
  }

 private:
  std::pair<Eigen::Map<const Mat>, Eigen::Map<const Vec>> layer(std::size_t l,
                                                                Eigen::Index off) const {
    const Eigen::Index wn = static_cast<Eigen::Index>(dims_[l]) * dims_[l + 1];
    return {Eigen::Map<const Mat>(params_.data() + off, dims_[l], dims_[l + 1]),
            Eigen::Map<const Vec>(params_.data() + off + wn, dims_[l + 1])};
  }

  std::vector<int> dims_;
  Vec params_;
};

}  // namespace serp
