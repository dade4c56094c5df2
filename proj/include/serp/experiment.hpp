#pragma once

// Experiment orchestration shared by the CLI and the acceptance suite:
// profile presets, config hashing, per-session seed derivation, dataset
// assembly, per-method training and the comparison/sweep drivers.

#include <filesystem>
#include <future>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "serp/analytical.hpp"
#include "serp/dataset.hpp"
#include "serp/evaluation.hpp"
#include "serp/io.hpp"
#include "serp/lstm.hpp"
#include "serp/mlp.hpp"
#include "serp/ridge.hpp"
#include "serp/train.hpp"

namespace serp {

struct ExperimentConfig {
  PlantConfig plant;
  int sessions = 23;
  int steps = 2100;
  int burnin = 100;
  int target_refresh = 5;
  int window = 4;  // H
  int mlp_width = 512;
  int mlp_hidden_layers = 3;  // plus the linear output: four weight layers
  int lstm_hidden = 512;
  TrainConfig training;
  std::vector<int> sweep_windows = {1, 2, 4, 8, 16};
  double ridge_lambda = 1e-6;
  std::string profile = "full";
  std::uint64_t master_seed = 12345;
  std::string out_dir = "out";
};

// Profiles: full mirrors the data-collection and training constants of
// the hardware experiment; desk shrinks data and model width so the
// whole comparison fits a laptop run; ci is the tiny smoke-test scale.
inline ExperimentConfig make_profile(const std::string& name) {
  ExperimentConfig cfg;
  cfg.profile = name;
  if (name == "full") {
    // defaults above
  } else if (name == "desk") {
    cfg.sessions = 6;
    cfg.steps = 2100;
    cfg.window = 8;
    cfg.mlp_width = 128;
    cfg.lstm_hidden = 64;
    cfg.training.max_epochs = 600;
  } else if (name == "ci") {
    cfg.sessions = 4;
    cfg.steps = 500;
    cfg.mlp_width = 64;
    cfg.lstm_hidden = 32;
    cfg.training.max_epochs = 30;
    cfg.sweep_windows = {1, 4};
  } else {
    throw std::invalid_argument("unknown profile: " + name + " (full | desk | ci)");
  }
  return cfg;
}

inline json experiment_to_json(const ExperimentConfig& cfg) {
  json j;
  j["plant"] = plant_config_to_json(cfg.plant);
  j["sessions"] = cfg.sessions;
  j["steps"] = cfg.steps;
  j["burnin"] = cfg.burnin;
  j["target_refresh"] = cfg.target_refresh;
  j["window"] = cfg.window;
  j["mlp_width"] = cfg.mlp_width;
  j["mlp_hidden_layers"] = cfg.mlp_hidden_layers;
  j["lstm_hidden"] = cfg.lstm_hidden;
  j["training"] = {{"batch_size", cfg.training.batch_size},
                   {"initial_lr", cfg.training.initial_lr},
                   {"lr_decay", cfg.training.lr_decay},
                   {"patience", cfg.training.patience},
                   {"stop_lr", cfg.training.stop_lr},
                   {"beta1", cfg.training.beta1},
                   {"beta2", cfg.training.beta2},
                   {"epsilon", cfg.training.epsilon},
                   {"max_epochs", cfg.training.max_epochs}};
  j["sweep_windows"] = cfg.sweep_windows;
  j["ridge_lambda"] = cfg.ridge_lambda;
  j["profile"] = cfg.profile;
  j["master_seed"] = cfg.master_seed;
  return j;
}

inline ExperimentConfig experiment_from_json(const json& j) {
  ExperimentConfig cfg = make_profile(j.value("profile", std::string("full")));
  if (j.contains("plant")) cfg.plant = plant_config_from_json(j.at("plant"));
  cfg.sessions = j.value("sessions", cfg.sessions);
  cfg.steps = j.value("steps", cfg.steps);
  cfg.burnin = j.value("burnin", cfg.burnin);
  cfg.target_refresh = j.value("target_refresh", cfg.target_refresh);
  cfg.window = j.value("window", cfg.window);
  cfg.mlp_width = j.value("mlp_width", cfg.mlp_width);
  cfg.mlp_hidden_layers = j.value("mlp_hidden_layers", cfg.mlp_hidden_layers);
  cfg.lstm_hidden = j.value("lstm_hidden", cfg.lstm_hidden);
  if (j.contains("training")) {
    const json& t = j.at("training");
    cfg.training.batch_size = t.value("batch_size", cfg.training.batch_size);
    cfg.training.initial_lr = t.value("initial_lr", cfg.training.initial_lr);
    cfg.training.lr_decay = t.value("lr_decay", cfg.training.lr_decay);
    cfg.training.patience = t.value("patience", cfg.training.patience);
    cfg.training.stop_lr = t.value("stop_lr", cfg.training.stop_lr);
    cfg.training.max_epochs = t.value("max_epochs", cfg.training.max_epochs);
  }
  if (j.contains("sweep_windows"))
    cfg.sweep_windows = j.at("sweep_windows").get<std::vector<int>>();
  cfg.ridge_lambda = j.value("ridge_lambda", cfg.ridge_lambda);
  cfg.master_seed = j.value("master_seed", cfg.master_seed);
  return cfg;
}

// Hash of the canonical serialized config; embedded in every artifact.
inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
  return fnv1a(experiment_to_json(cfg).dump());
}

// Documented counter scheme: session i's stream is seeded from
// seed_seq(master_seed, i), so sessions are independent and the set is
// reproducible from the master seed alone.
inline std::uint64_t derive_session_seed(std::uint64_t master_seed, int session_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(session_index)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

inline std::filesystem::path sessions_dir(const ExperimentConfig& cfg) {
  return std::filesystem::path(cfg.out_dir) / "sessions";
}
inline std::filesystem::path checkpoints_dir(const ExperimentConfig& cfg) {
  return std::filesystem::path(cfg.out_dir) / "checkpoints";
}
inline std::filesystem::path reports_dir(const ExperimentConfig& cfg) {
  return std::filesystem::path(cfg.out_dir) / "reports";
}

// Runs every session (in parallel up to `workers`) and writes CSVs and
// manifests under out_dir/sessions.
inline void generate_sessions(const ExperimentConfig& cfg, int workers = 1) {
  const std::uint64_t hash = config_hash(cfg);
  std::filesystem::create_directories(sessions_dir(cfg));
  std::vector<std::future<SessionLog>> jobs;
  for (int i = 0; i < cfg.sessions; ++i) {
    auto run = [&cfg, i]() {
      return run_session(cfg.plant, derive_session_seed(cfg.master_seed, i), cfg.steps,
                         cfg.target_refresh);
    };
    jobs.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, run));
    if (workers > 1 && static_cast<int>(jobs.size()) % workers == 0)
      for (auto& f : jobs) f.wait();
  }
  for (int i = 0; i < cfg.sessions; ++i) {
    SessionLog log = jobs[static_cast<std::size_t>(i)].get();
    log.config_hash = hash;
    save_session(sessions_dir(cfg), i, log);
  }
}

inline std::vector<SessionLog> load_sessions(const ExperimentConfig& cfg) {
  const std::uint64_t hash = config_hash(cfg);
  std::vector<SessionLog> logs;
  for (int i = 0; i < cfg.sessions; ++i) {
    SessionLog log = load_session(sessions_dir(cfg), i);
    if (log.config_hash != hash)
      throw HashMismatchError("session " + std::to_string(i) +
                              " was generated under a different config");
    logs.push_back(std::move(log));
  }
  return logs;
}

// Split sessions, discard burn-in, fit the normalizer on the training
// split only, and keep the trimmed logs around for embedding.
struct DatasetBundle {
  std::vector<SessionLog> train, val, test;
  Normalizer normalizer;
};

inline DatasetBundle make_bundle(const std::vector<SessionLog>& logs, int burnin) {
  SplitIndices split = split_sessions(static_cast<int>(logs.size()));
  DatasetBundle b;
  for (int i : split.train) b.train.push_back(discard_burnin(logs[static_cast<std::size_t>(i)], burnin));
  for (int i : split.val) b.val.push_back(discard_burnin(logs[static_cast<std::size_t>(i)], burnin));
  for (int i : split.test) b.test.push_back(discard_burnin(logs[static_cast<std::size_t>(i)], burnin));
  b.normalizer = fit_normalizer(b.train);
  return b;
}

enum class Method { PrcMlp, PrcLin, NoLoad, Lstm };

inline std::string method_name(Method m) {
  switch (m) {
    case Method::PrcMlp: return "prc-mlp";
    case Method::PrcLin: return "prc-lin";
    case Method::NoLoad: return "no-load";
    case Method::Lstm: return "lstm";
  }
  throw std::logic_error("unreachable");
}

inline std::optional<Method> method_from_name(const std::string& s) {
  if (s == "prc-mlp") return Method::PrcMlp;
  if (s == "prc-lin") return Method::PrcLin;
  if (s == "no-load") return Method::NoLoad;
  if (s == "lstm") return Method::Lstm;
  return std::nullopt;
}

inline SupervisedSet embed_split(const std::vector<SessionLog>& logs, int window,
                                 const Normalizer& norm, Method method) {
  SupervisedSet all;
  int index = 0;
  for (const SessionLog& log : logs) {
    SupervisedSet one = (method == Method::Lstm)
                            ? lstm_sequences(log, window, norm, index)
                            : embed(log, window, norm, index, method != Method::NoLoad);
    all.append(one);
    ++index;
  }
  return all;
}

inline std::unique_ptr<Model> make_model(Method method, const ExperimentConfig& cfg, int window) {
  switch (method) {
    case Method::PrcMlp:
      return std::make_unique<MlpReadout>(
          MlpReadout::standard(embed_dim(window), cfg.mlp_width, cfg.mlp_hidden_layers));
    case Method::NoLoad:
      return std::make_unique<MlpReadout>(
          MlpReadout::standard(embed_dim(window, false), cfg.mlp_width, cfg.mlp_hidden_layers));
    case Method::PrcLin:
      return std::make_unique<MlpReadout>(std::vector<int>{embed_dim(window), kMarkerDim});
    case Method::Lstm:
      return std::make_unique<LstmBaseline>(kSensorDim + kCommandDim, window, cfg.lstm_hidden);
  }
  throw std::logic_error("unreachable");
}

inline json architecture_json(Method method, const ExperimentConfig& cfg, int window) {
  json j;
  j["method"] = method_name(method);
  switch (method) {
    case Method::PrcMlp:
    case Method::NoLoad:
      j["type"] = "mlp";
      j["width"] = cfg.mlp_width;
      j["hidden_layers"] = cfg.mlp_hidden_layers;
      j["input_dim"] = embed_dim(window, method != Method::NoLoad);
      break;
    case Method::PrcLin:
      j["type"] = "linear";
      j["input_dim"] = embed_dim(window);
      break;
    case Method::Lstm:
      j["type"] = "lstm";
      j["hidden"] = cfg.lstm_hidden;
      j["frame_dim"] = kSensorDim + kCommandDim;
      break;
  }
  return j;
}

inline std::unique_ptr<Model> model_from_checkpoint(const Checkpoint& ck,
                                                    const ExperimentConfig& cfg) {
  std::optional<Method> method = method_from_name(ck.method);
  if (!method) throw std::runtime_error("checkpoint with unknown method " + ck.method);
  std::unique_ptr<Model> model = make_model(*method, cfg, ck.window);
  if (model->params().size() != ck.weights.size())
    throw HashMismatchError("checkpoint weight count does not match the configured architecture");
  model->params() = ck.weights;
  return model;
}

struct TrainedMethod {
  Checkpoint checkpoint;
  TrainResult curve;
};

// Trains one method on the bundle. PRC-LIN with use_ridge goes through
// the closed form instead of the gradient engine (no training curve).
inline TrainedMethod train_method(Method method, const ExperimentConfig& cfg,
                                  const DatasetBundle& bundle, int window,
                                  bool use_ridge = false) {
  SupervisedSet train_set = embed_split(bundle.train, window, bundle.normalizer, method);
  SupervisedSet val_set = embed_split(bundle.val, window, bundle.normalizer, method);

  TrainedMethod out;
  out.checkpoint.method = method_name(method);
  out.checkpoint.window = window;
  out.checkpoint.normalizer = bundle.normalizer;
  out.checkpoint.config_hash = config_hash(cfg);
  out.checkpoint.architecture = architecture_json(method, cfg, window);

  if (method == Method::PrcLin && use_ridge) {
    LinearReadout fit = ridge_fit(train_set.inputs, train_set.targets, cfg.ridge_lambda);
    // pack into the single-layer MLP parameter layout (weights then bias)
    Vec packed(fit.weights.size() + fit.bias.size());
    packed.head(fit.weights.size()) =
        Eigen::Map<const Vec>(fit.weights.data(), fit.weights.size());
    packed.tail(fit.bias.size()) = fit.bias;
    out.checkpoint.weights = packed;
    out.checkpoint.architecture["trainer"] = "ridge";
    out.checkpoint.training_curve = json::object();
    return out;
  }

  std::unique_ptr<Model> model = make_model(method, cfg, window);
  TrainConfig tc = cfg.training;
  tc.seed = cfg.master_seed ^ fnv1a(method_name(method)) ^ static_cast<std::uint64_t>(window);
  model->init_weights(tc.seed);
  out.curve = train(*model, train_set.inputs, train_set.targets, val_set.inputs, val_set.targets,
                    tc);
  out.checkpoint.weights = model->params();
  out.checkpoint.training_curve = {{"train_loss", out.curve.train_loss},
                                   {"val_loss", out.curve.val_loss},
                                   {"lr", out.curve.lr_history},
                                   {"best_val_loss", out.curve.best_val_loss},
                                   {"best_epoch", out.curve.best_epoch}};
  return out;
}

// Denormalized (mm) marker predictions of a checkpointed model on one
// test session.
inline Mat predict_markers(const Checkpoint& ck, const ExperimentConfig& cfg,
                           const SessionLog& test_log) {
  std::optional<Method> method = method_from_name(ck.method);
  if (!method) throw std::runtime_error("unknown method " + ck.method);
  SupervisedSet set = embed_split({test_log}, ck.window, ck.normalizer, *method);
  std::unique_ptr<Model> model = model_from_checkpoint(ck, cfg);
  Mat pred = model->predict(set.inputs);
  return ck.normalizer.denormalize(pred, kMarkerOffset);
}

// Ground-truth markers aligned with predict_markers output (the first
// window-1 steps carry no prediction).
inline Mat aligned_truth(const SessionLog& test_log, int window) {
  return test_log.markers.bottomRows(test_log.steps() - window + 1);
}

struct SweepRun {
  SweepResult result;
  std::vector<TrainedMethod> trained;  // one per unique window, same order
};

// Trains the PRC-MLP once per unique window with identical seeds and
// records the best validation loss per window.
inline SweepRun sweep_windows(const ExperimentConfig& cfg, const DatasetBundle& bundle,
                              std::vector<int> windows, int workers = 1) {
  std::sort(windows.begin(), windows.end());
  windows.erase(std::unique(windows.begin(), windows.end()), windows.end());
  for (int h : windows)
    if (h < 1) throw WindowError("sweep: window must be >= 1");

  SweepRun run;
  run.trained.resize(windows.size());
  std::vector<SweepPoint> points(windows.size());

  auto one = [&](std::size_t idx) {
    SweepPoint p;
    p.window = windows[idx];
    try {
      run.trained[idx] = train_method(Method::PrcMlp, cfg, bundle, windows[idx]);
      p.val_loss = run.trained[idx].curve.best_val_loss;
    } catch (const TrainingDivergedError&) {
      p.diverged = true;
    }
    points[idx] = p;
  };

  if (workers > 1) {
    std::vector<std::future<void>> jobs;
    for (std::size_t i = 0; i < windows.size(); ++i)
      jobs.push_back(std::async(std::launch::async, one, i));
    for (auto& f : jobs) f.get();
  } else {
    for (std::size_t i = 0; i < windows.size(); ++i) one(i);
  }

  run.result.points = points;
  run.result.finalize();
  return run;
}

}  // namespace serp
