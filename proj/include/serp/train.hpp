#pragma once

// Shared training engine: MSE objective, Adam updates, shuffled
// mini-batches, and the validation-driven learning-rate schedule
// (three consecutive increases -> lr x0.1, stop below the floor).

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "serp/model.hpp"

namespace serp {

struct AdamState {
  Vec m, v;
  long step = 0;

  explicit AdamState(Eigen::Index n) : m(Vec::Zero(n)), v(Vec::Zero(n)) {}
};

struct TrainConfig {
  int batch_size = 512;
  double initial_lr = 1e-3;
  double lr_decay = 0.1;
  int patience = 3;       // consecutive val-loss increases before decay
  double stop_lr = 1e-6;  // terminate once lr drops below this
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  int max_epochs = 500;  // safety cap; the schedule normally stops first
};

// Standard bias-corrected Adam update, in place.
inline void adam_step(Vec& params, const Vec& grads, AdamState& state, double lr,
                      double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw ShapeError("adam_step: size mismatch");
  state.step += 1;
  state.m = beta1 * state.m + (1.0 - beta1) * grads;
  state.v = beta2 * state.v + (1.0 - beta2) * grads.cwiseProduct(grads);
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  params.array() -=
      lr * (state.m.array() / bc1) / ((state.v.array() / bc2).sqrt() + epsilon);
}

struct TrainResult {
  std::vector<double> train_loss;  // per epoch (mean over batches)
  std::vector<double> val_loss;    // per epoch
  std::vector<double> lr_history;  // lr in effect during each epoch
  double best_val_loss = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  int epochs = 0;
};

// Trains `model` in place. Validation MSE is checked after every epoch;
// an increase is measured against the immediately previous check, and
// `patience` consecutive increases decay the learning rate and reset
// the counter. Weights with the best validation loss are restored.
inline TrainResult train(Model& model, const Mat& train_x, const Mat& train_y, const Mat& val_x,
                         const Mat& val_y, const TrainConfig& cfg) {
  if (train_x.rows() == 0 || val_x.rows() == 0)
    throw InsufficientDataError("train: empty train or validation set");

  std::mt19937_64 rng(cfg.seed);
  AdamState opt(model.params().size());
  Vec grad(model.params().size());
  Vec best_params = model.params();

  TrainResult result;
  double lr = cfg.initial_lr;
  double prev_val = std::numeric_limits<double>::infinity();
  int increases = 0;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(train_x.rows()));
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    int batches = 0;
    for (Eigen::Index start = 0; start < train_x.rows(); start += cfg.batch_size) {
      const Eigen::Index n = std::min<Eigen::Index>(cfg.batch_size, train_x.rows() - start);
      Mat bx(n, train_x.cols()), by(n, train_y.cols());
      for (Eigen::Index i = 0; i < n; ++i) {
        bx.row(i) = train_x.row(order[static_cast<std::size_t>(start + i)]);
        by.row(i) = train_y.row(order[static_cast<std::size_t>(start + i)]);
      }
      const double loss = model.loss_and_grad(bx, by, grad);
      if (!std::isfinite(loss)) throw TrainingDivergedError("train: non-finite loss");
      adam_step(model.params(), grad, opt, lr, cfg.beta1, cfg.beta2, cfg.epsilon);
      epoch_loss += loss;
      ++batches;
    }

    const double val = model.mse(val_x, val_y);
    if (!std::isfinite(val)) throw TrainingDivergedError("train: non-finite validation loss");
    result.train_loss.push_back(epoch_loss / batches);
    result.val_loss.push_back(val);
    result.lr_history.push_back(lr);
    result.epochs = epoch + 1;

    if (val < result.best_val_loss) {
      result.best_val_loss = val;
      result.best_epoch = epoch;
      best_params = model.params();
    }

    if (val > prev_val) {
      if (++increases >= cfg.patience) {
        lr *= cfg.lr_decay;
        increases = 0;
        if (lr < cfg.stop_lr) break;
      }
    } else {
      increases = 0;
    }
    prev_val = val;
  }

  model.params() = best_params;
  return result;
}

}  // namespace serp
