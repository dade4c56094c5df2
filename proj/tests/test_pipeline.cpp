#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "serp/experiment.hpp"

using namespace serp;

namespace {

ExperimentConfig tiny_config(const std::string& out_dir) {
  ExperimentConfig cfg = make_profile("ci");
  cfg.sessions = 3;
  cfg.steps = 260;
  cfg.burnin = 50;
  cfg.window = 2;
  cfg.mlp_width = 24;
  cfg.lstm_hidden = 12;
  cfg.training.batch_size = 64;
  cfg.training.max_epochs = 6;
  cfg.out_dir = out_dir;
  return cfg;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name)
      : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("session CSV and manifest round trip") {
  PlantConfig plant;
  SessionLog log = run_session(plant, 99, 120);
  log.config_hash = 777;
  TempDir dir("serp_io_test");
  save_session(dir.path, 0, log);
  SessionLog back = load_session(dir.path, 0);
  REQUIRE(back.seed == 99);
  REQUIRE(back.config_hash == 777);
  REQUIRE((back.sensors - log.sensors).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((back.commands - log.commands).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((back.markers - log.markers).cwiseAbs().maxCoeff() == 0.0);

  REQUIRE_THROWS(load_session(dir.path, 5));
}

TEST_CASE("geometry and plant config JSON round trip") {
  PlantConfig cfg;
  cfg.backlash_width = 0.05;
  cfg.geometry.link_lengths[2] = 70.0;
  PlantConfig back = plant_config_from_json(plant_config_to_json(cfg));
  REQUIRE(back.backlash_width == cfg.backlash_width);
  REQUIRE(back.geometry.link_lengths[2] == 70.0);
  REQUIRE(back.geometry.joint_axes == cfg.geometry.joint_axes);
  REQUIRE(plant_config_to_json(back) == plant_config_to_json(cfg));
}

TEST_CASE("checkpoint round trip") {
  Checkpoint ck;
  ck.method = "prc-mlp";
  ck.window = 4;
  ck.architecture = {{"type", "mlp"}, {"width", 8}};
  ck.weights = Vec::Random(31);
  ck.config_hash = 1234;
  ck.training_curve = {{"val_loss", {0.5, 0.4}}};
  TempDir dir("serp_ck_test");
  save_checkpoint(dir.path / "ck.json", ck);
  Checkpoint back = load_checkpoint(dir.path / "ck.json");
  REQUIRE(back.method == ck.method);
  REQUIRE(back.window == 4);
  REQUIRE(back.config_hash == 1234);
  REQUIRE((back.weights - ck.weights).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("supervised set file round trip detects corruption") {
  PlantConfig plant;
  SessionLog log = run_session(plant, 7, 80);
  Normalizer norm = fit_normalizer({log});
  SupervisedSet set = embed(log, 3, norm);
  TempDir dir("serp_sv_test");
  save_supervised_set(dir.path / "train.csv", set, norm, "train");
  SupervisedSet back = load_supervised_set(dir.path / "train.csv");
  REQUIRE(back.window == 3);
  REQUIRE((back.inputs - set.inputs).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE((back.targets - set.targets).cwiseAbs().maxCoeff() == 0.0);

  // flip a byte: hash check must refuse the file
  std::string csv = io_detail::read_text(dir.path / "train.csv");
  csv[10] = (csv[10] == '1') ? '2' : '1';
  io_detail::write_text_atomic(dir.path / "train.csv", csv);
  REQUIRE_THROWS_AS(load_supervised_set(dir.path / "train.csv"), HashMismatchError);
}

TEST_CASE("config hash changes with content, session seeds are distinct") {
  ExperimentConfig a = make_profile("ci");
  ExperimentConfig b = a;
  REQUIRE(config_hash(a) == config_hash(b));
  b.window = a.window + 1;
  REQUIRE(config_hash(a) != config_hash(b));

  std::set<std::uint64_t> seeds;
  for (int i = 0; i < 50; ++i) seeds.insert(derive_session_seed(12345, i));
  REQUIRE(seeds.size() == 50);
  REQUIRE(derive_session_seed(12345, 3) == derive_session_seed(12345, 3));
  REQUIRE(derive_session_seed(12345, 3) != derive_session_seed(54321, 3));
}

TEST_CASE("experiment config JSON round trip") {
  ExperimentConfig cfg = make_profile("desk");
  cfg.window = 7;
  cfg.master_seed = 42;
  ExperimentConfig back = experiment_from_json(experiment_to_json(cfg));
  REQUIRE(config_hash(back) == config_hash(cfg));
}

TEST_CASE("end-to-end pipeline is reproducible and hash-guarded") {
  TempDir dir("serp_e2e_test");
  ExperimentConfig cfg = tiny_config((dir.path / "run").string());

  generate_sessions(cfg);
  std::vector<SessionLog> logs = load_sessions(cfg);
  REQUIRE(static_cast<int>(logs.size()) == 3);
  REQUIRE(logs[0].steps() == cfg.steps);

  // regeneration is byte-identical
  std::string before = io_detail::read_text(sessions_dir(cfg) / "session_00.csv");
  generate_sessions(cfg);
  REQUIRE(io_detail::read_text(sessions_dir(cfg) / "session_00.csv") == before);

  DatasetBundle bundle = make_bundle(logs, cfg.burnin);
  REQUIRE(bundle.train.size() == 1);
  REQUIRE(bundle.val.size() == 1);
  REQUIRE(bundle.test.size() == 1);

  // train twice: identical weights
  TrainedMethod m1 = train_method(Method::PrcMlp, cfg, bundle, cfg.window);
  TrainedMethod m2 = train_method(Method::PrcMlp, cfg, bundle, cfg.window);
  REQUIRE((m1.checkpoint.weights - m2.checkpoint.weights).cwiseAbs().maxCoeff() == 0.0);

  // evaluate through the checkpoint path
  Mat pred = predict_markers(m1.checkpoint, cfg, bundle.test[0]);
  Mat truth = aligned_truth(bundle.test[0], cfg.window);
  ErrorReport learned = marker_error(pred, truth);
  ErrorReport analytical =
      marker_error(analytical_estimate(bundle.test[0], cfg.plant.geometry), bundle.test[0].markers);
  REQUIRE(learned.mean_mm > 0.0);
  REQUIRE(std::isfinite(analytical.mean_mm));

  // checkpoints from another config are refused by the model loader
  ExperimentConfig other = cfg;
  other.mlp_width = cfg.mlp_width + 8;
  REQUIRE_THROWS_AS(model_from_checkpoint(m1.checkpoint, other), HashMismatchError);

  // sessions generated under a different config hash are refused
  ExperimentConfig changed = cfg;
  changed.plant.backlash_width += 0.01;
  REQUIRE_THROWS_AS(load_sessions(changed), HashMismatchError);
}

TEST_CASE("ridge-trained prc-lin checkpoint evaluates") {
  TempDir dir("serp_lin_test");
  ExperimentConfig cfg = tiny_config((dir.path / "run").string());
  generate_sessions(cfg);
  DatasetBundle bundle = make_bundle(load_sessions(cfg), cfg.burnin);
  TrainedMethod lin = train_method(Method::PrcLin, cfg, bundle, cfg.window, /*use_ridge=*/true);
  Mat pred = predict_markers(lin.checkpoint, cfg, bundle.test[0]);
  ErrorReport r = marker_error(pred, aligned_truth(bundle.test[0], cfg.window));
  REQUIRE(std::isfinite(r.mean_mm));
  REQUIRE(r.mean_mm < 100.0);
}

TEST_CASE("lstm method trains through the same engine") {
  TempDir dir("serp_lstm_test");
  ExperimentConfig cfg = tiny_config((dir.path / "run").string());
  cfg.training.max_epochs = 3;
  generate_sessions(cfg);
  DatasetBundle bundle = make_bundle(load_sessions(cfg), cfg.burnin);
  TrainedMethod lstm = train_method(Method::Lstm, cfg, bundle, cfg.window);
  REQUIRE(lstm.checkpoint.architecture.at("type") == "lstm");
  Mat pred = predict_markers(lstm.checkpoint, cfg, bundle.test[0]);
  REQUIRE(pred.rows() == bundle.test[0].steps() - cfg.window + 1);
}

TEST_CASE("sweep dedupes windows and finds an argmin") {
  TempDir dir("serp_sweep_test");
  ExperimentConfig cfg = tiny_config((dir.path / "run").string());
  cfg.training.max_epochs = 3;
  generate_sessions(cfg);
  DatasetBundle bundle = make_bundle(load_sessions(cfg), cfg.burnin);
  SweepRun run = sweep_windows(cfg, bundle, {2, 1, 2, 1});
  REQUIRE(run.result.points.size() == 2);
  REQUIRE(run.result.points[0].window == 1);
  REQUIRE(run.result.points[1].window == 2);
  REQUIRE((run.result.best_window == 1 || run.result.best_window == 2));
}
