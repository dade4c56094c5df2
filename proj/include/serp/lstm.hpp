#pragma once

// Single-layer LSTM baseline with a linear head on the final hidden
// state. Each input row is a flattened sequence of `window` frames of
// `frame_dim` values; gradients come from backpropagation through time.

#include <random>
#include <vector>

#include "serp/model.hpp"

namespace serp {

class LstmBaseline : public Model {
 public:
  LstmBaseline(int frame_dim, int window, int hidden, int output_dim = kMarkerDim)
      : frame_dim_(frame_dim), window_(window), hidden_(hidden), output_dim_(output_dim) {
    if (frame_dim < 1 || window < 1 || hidden < 1)
      throw ShapeError("LstmBaseline: dimensions must be positive");
    params_ = Vec::Zero(param_count());
  }

  int input_dim() const override { return frame_dim_ * window_; }
  int output_dim() const override { return output_dim_; }
  int hidden_size() const { return hidden_; }
  int window() const { return window_; }
  int frame_dim() const { return frame_dim_; }
  Vec& params() override { return params_; }
  const Vec& params() const override { return params_; }

  void init_weights(std::uint64_t seed) override {
    std::mt19937_64 rng(seed);
    auto fill = [&rng](double* data, Eigen::Index n, int fan_in) {
      const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
      std::uniform_real_distribution<double> d(-scale, scale);
      for (Eigen::Index i = 0; i < n; ++i) data[i] = d(rng);
    };
    Offsets o = offsets();
    fill(params_.data() + o.wx, static_cast<Eigen::Index>(frame_dim_) * 4 * hidden_, frame_dim_);
    fill(params_.data() + o.wh, static_cast<Eigen::Index>(hidden_) * 4 * hidden_, hidden_);
    params_.segment(o.b, 4 * hidden_).setZero();
    // forget-gate bias at 1 keeps early memory open
    params_.segment(o.b + hidden_, hidden_).setOnes();
    fill(params_.data() + o.head_w, static_cast<Eigen::Index>(hidden_) * output_dim_, hidden_);
    params_.segment(o.head_b, output_dim_).setZero();
  }

  Mat predict(const Mat& x) const override { return forward(x, nullptr); }

  double loss_and_grad(const Mat& x, const Mat& y, Vec& grad) const override {
    if (x.rows() == 0) throw ShapeError("LstmBaseline::loss_and_grad: empty batch");
    std::vector<Cache> caches;
    Mat pred = forward(x, &caches);
    const double denom = static_cast<double>(x.rows()) * output_dim_;
    Mat residual = pred - y;
    const double loss = residual.squaredNorm() / denom;

    grad.setZero(params_.size());
    Offsets o = offsets();
    Eigen::Map<const Mat> wx(params_.data() + o.wx, frame_dim_, 4 * hidden_);
    Eigen::Map<const Mat> wh(params_.data() + o.wh, hidden_, 4 * hidden_);
    Eigen::Map<const Mat> head_w(params_.data() + o.head_w, hidden_, output_dim_);
    Eigen::Map<Mat> g_wx(grad.data() + o.wx, frame_dim_, 4 * hidden_);
    Eigen::Map<Mat> g_wh(grad.data() + o.wh, hidden_, 4 * hidden_);
    Eigen::Map<Vec> g_b(grad.data() + o.b, 4 * hidden_);
    Eigen::Map<Mat> g_head_w(grad.data() + o.head_w, hidden_, output_dim_);
    Eigen::Map<Vec> g_head_b(grad.data() + o.head_b, output_dim_);

    Mat delta = (2.0 / denom) * residual;
    g_head_w = caches.back().h.transpose() * delta;
    g_head_b = delta.colwise().sum();

    Mat dh = delta * head_w.transpose();
    Mat dc = Mat::Zero(x.rows(), hidden_);
    for (int t = window_ - 1; t >= 0; --t) {
      const Cache& cc = caches[static_cast<std::size_t>(t)];
      Mat tanh_c = cc.c.array().tanh();
      dc += dh.cwiseProduct(cc.o).cwiseProduct((1.0 - tanh_c.array().square()).matrix());
      Mat dz(x.rows(), 4 * hidden_);
      dz.middleCols(0, hidden_) = dc.cwiseProduct(cc.g)
                                      .cwiseProduct(cc.i)
                                      .cwiseProduct((1.0 - cc.i.array()).matrix());
      dz.middleCols(hidden_, hidden_) = dc.cwiseProduct(cc.c_prev)
                                            .cwiseProduct(cc.f)
                                            .cwiseProduct((1.0 - cc.f.array()).matrix());
      dz.middleCols(2 * hidden_, hidden_) =
          dc.cwiseProduct(cc.i).cwiseProduct((1.0 - cc.g.array().square()).matrix());
      dz.middleCols(3 * hidden_, hidden_) = dh.cwiseProduct(tanh_c)
                                                .cwiseProduct(cc.o)
                                                .cwiseProduct((1.0 - cc.o.array()).matrix());

      Mat x_t = x.middleCols(static_cast<Eigen::Index>(t) * frame_dim_, frame_dim_);
      g_wx += x_t.transpose() * dz;
      g_wh += cc.h_prev.transpose() * dz;
      g_b += dz.colwise().sum();

      dh = dz * wh.transpose();
      dc = dc.cwiseProduct(cc.f);
    }
    return loss;
  }

 private:
  struct Offsets {
    Eigen::Index wx, wh, b, head_w, head_b;
  };

  Offsets offsets() const {
    Offsets o;
    o.wx = 0;
    o.wh = o.wx + static_cast<Eigen::Index>(frame_dim_) * 4 * hidden_;
    o.b = o.wh + static_cast<Eigen::Index>(hidden_) * 4 * hidden_;
    o.head_w = o.b + 4 * hidden_;
    o.head_b = o.head_w + static_cast<Eigen::Index>(hidden_) * output_dim_;
    return o;
  }

  Eigen::Index param_count() const {
    Offsets o = offsets();
    return o.head_b + output_dim_;
  }

  struct Cache {
    Mat i, f, g, o, c, h, c_prev, h_prev;
  };

  Mat forward(const Mat& x, std::vector<Cache>* caches) const {
    if (x.cols() != input_dim()) throw ShapeError("LstmBaseline: input dim mismatch");
    Offsets off = offsets();
    Eigen::Map<const Mat> wx(params_.data() + off.wx, frame_dim_, 4 * hidden_);
    Eigen::Map<const Mat> wh(params_.data() + off.wh, hidden_, 4 * hidden_);
    Eigen::Map<const Vec> b(params_.data() + off.b, 4 * hidden_);
    Eigen::Map<const Mat> head_w(params_.data() + off.head_w, hidden_, output_dim_);
    Eigen::Map<const Vec> head_b(params_.data() + off.head_b, output_dim_);

    const Eigen::Index n = x.rows();
    Mat h = Mat::Zero(n, hidden_), c = Mat::Zero(n, hidden_);
    for (int t = 0; t < window_; ++t) {
      Mat x_t = x.middleCols(static_cast<Eigen::Index>(t) * frame_dim_, frame_dim_);
      Mat z = ((x_t * wx + h * wh).rowwise() + b.transpose());
      Mat gate_i = sigmoid(z.middleCols(0, hidden_));
      Mat gate_f = sigmoid(z.middleCols(hidden_, hidden_));
      Mat gate_g = z.middleCols(2 * hidden_, hidden_).array().tanh();
      Mat gate_o = sigmoid(z.middleCols(3 * hidden_, hidden_));
      Mat c_next = gate_f.cwiseProduct(c) + gate_i.cwiseProduct(gate_g);
      Mat h_next = gate_o.cwiseProduct(c_next.array().tanh().matrix());
      if (caches) {
        Cache cc;
        cc.i = gate_i;
        cc.f = gate_f;
        cc.g = gate_g;
        cc.o = gate_o;
        cc.c = c_next;
        cc.h = h_next;
        cc.c_prev = c;
        cc.h_prev = h;
        caches->push_back(std::move(cc));
      }
      c = std::move(c_next);
      h = std::move(h_next);
    }
    return (h * head_w).rowwise() + head_b.transpose();
  }

  static Mat sigmoid(const Mat& z) { return (1.0 / (1.0 + (-z.array()).exp())).matrix(); }

  int frame_dim_, window_, hidden_, output_dim_;
  Vec params_;
};

}  // namespace serp
