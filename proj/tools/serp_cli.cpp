// Batch entry points for the pose-estimation pipeline:
//   generate  - run the simulated data-collection sessions
//   train     - train one estimator and write its checkpoint
//   evaluate  - compare all available estimators on the test session
//   sweep     - train the MLP readout across window sizes
// Every artifact embeds the hash of the config that produced it, and
// train/evaluate refuse artifacts from a different config.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "serp/experiment.hpp"

using namespace serp;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string profile = "desk";
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  int workers = 1;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "JSON config file (overrides profile defaults)");
  cmd->add_option("--profile", o.profile, "profile preset: full | desk | ci");
  cmd->add_option("--seed", o.seed, "master seed")->each([&o](const std::string&) {
    o.seed_set = true;
  });
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--workers", o.workers, "parallel workers")->check(CLI::PositiveNumber);
}

ExperimentConfig resolve_config(const CommonOpts& o) {
  ExperimentConfig cfg;
  if (!o.config_path.empty()) {
    json j = json::parse(io_detail::read_text(o.config_path));
    if (!j.contains("profile")) j["profile"] = o.profile;
    cfg = experiment_from_json(j);
  } else {
    cfg = make_profile(o.profile);
  }
  if (o.seed_set) cfg.master_seed = o.seed;
  if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
  return cfg;
}

int cmd_generate(const CommonOpts& o) {
  ExperimentConfig cfg = resolve_config(o);
  generate_sessions(cfg, o.workers);
  json summary;
  summary["sessions"] = cfg.sessions;
  summary["steps"] = cfg.steps;
  summary["config_hash"] = config_hash(cfg);
  io_detail::write_text_atomic(std::filesystem::path(cfg.out_dir) / "generate.json",
                               summary.dump(2) + "\n");
  std::cout << "generated " << cfg.sessions << " sessions x " << cfg.steps << " steps under "
            << sessions_dir(cfg).string() << "\n";
  return 0;
}

int cmd_train(const CommonOpts& o, const std::string& method_str, bool use_ridge) {
  std::optional<Method> method = method_from_name(method_str);
  if (!method) {
    std::cerr << "{\"error\":\"unknown method '" << method_str
              << "'\",\"valid\":[\"prc-mlp\",\"prc-lin\",\"no-load\",\"lstm\"]}\n";
    return 2;
  }
  ExperimentConfig cfg = resolve_config(o);
  DatasetBundle bundle = make_bundle(load_sessions(cfg), cfg.burnin);
  TrainedMethod trained = train_method(*method, cfg, bundle, cfg.window, use_ridge);
  std::filesystem::create_directories(checkpoints_dir(cfg));
  std::filesystem::path path = checkpoints_dir(cfg) / (method_str + ".json");
  save_checkpoint(path, trained.checkpoint);
  std::cout << "trained " << method_str << " (window " << cfg.window << ") -> " << path.string();
  if (!trained.curve.val_loss.empty())
    std::cout << "  best val loss " << trained.curve.best_val_loss << " at epoch "
              << trained.curve.best_epoch;
  std::cout << "\n";
  return 0;
}

int cmd_evaluate(const CommonOpts& o) {
  ExperimentConfig cfg = resolve_config(o);
  const std::uint64_t hash = config_hash(cfg);
  DatasetBundle bundle = make_bundle(load_sessions(cfg), cfg.burnin);
  const SessionLog& test_log = bundle.test.front();

  std::map<std::string, Mat> predictions;
  std::map<std::string, Mat> truths;
  std::vector<std::string> absent;

  // analytical baseline needs no checkpoint
  predictions["analytical"] = analytical_estimate(test_log, cfg.plant.geometry);
  truths["analytical"] = test_log.markers;

  for (const std::string& name : {"prc-mlp", "prc-lin", "no-load", "lstm"}) {
    std::filesystem::path path = checkpoints_dir(cfg) / (name + std::string(".json"));
    if (!std::filesystem::exists(path)) {
      absent.push_back(name);
      continue;
    }
    Checkpoint ck = load_checkpoint(path);
    if (ck.config_hash != hash)
      throw HashMismatchError("checkpoint " + path.string() +
                              " was trained under a different config; retrain or fix --config");
    if (ck.window != cfg.window)
      throw HashMismatchError("checkpoint " + path.string() + " uses window " +
                              std::to_string(ck.window) + " but the dataset config says " +
                              std::to_string(cfg.window));
    predictions[name] = predict_markers(ck, cfg, test_log);
    truths[name] = aligned_truth(test_log, ck.window);
  }

  ComparisonTable table;
  for (const auto& [name, pred] : predictions)
    table.rows[name] = marker_error(pred, truths.at(name));

  json report;
  report["config_hash"] = hash;
  report["test_session_steps"] = test_log.steps();
  for (const auto& [name, r] : table.rows) {
    report["methods"][name] = {
        {"mean_mm", r.mean_mm},
        {"std_mm", r.std_mm},
        {"mse_mm2", r.mse_mm2},
        {"samples", r.samples},
        {"per_marker_mean_mm",
         std::vector<double>(r.per_marker_mean_mm.data(),
                             r.per_marker_mean_mm.data() + r.per_marker_mean_mm.size())}};
  }
  report["absent"] = absent;

  std::filesystem::create_directories(reports_dir(cfg));
  io_detail::write_text_atomic(reports_dir(cfg) / "comparison.json", report.dump(2) + "\n");
  io_detail::write_text_atomic(reports_dir(cfg) / "comparison.txt", table.format());
  std::cout << table.format();
  if (!absent.empty()) {
    std::cout << "absent:";
    for (const auto& name : absent) std::cout << " " << name;
    std::cout << "\n";
  }
  return 0;
}

int cmd_sweep(const CommonOpts& o, std::vector<int> windows) {
  ExperimentConfig cfg = resolve_config(o);
  if (windows.empty()) windows = cfg.sweep_windows;
  DatasetBundle bundle = make_bundle(load_sessions(cfg), cfg.burnin);
  SweepRun run = sweep_windows(cfg, bundle, windows, o.workers);

  std::ostringstream csv;
  csv.precision(17);
  csv << "H,val_loss,diverged\n";
  for (const SweepPoint& p : run.result.points)
    csv << p.window << "," << p.val_loss << "," << (p.diverged ? 1 : 0) << "\n";

  json summary;
  summary["config_hash"] = config_hash(cfg);
  summary["best_window"] = run.result.best_window;
  for (const SweepPoint& p : run.result.points)
    summary["points"].push_back(
        {{"H", p.window}, {"val_loss", p.val_loss}, {"diverged", p.diverged}});

  std::filesystem::create_directories(reports_dir(cfg));
  io_detail::write_text_atomic(reports_dir(cfg) / "sweep.csv", csv.str());
  io_detail::write_text_atomic(reports_dir(cfg) / "sweep.json", summary.dump(2) + "\n");
  std::cout << csv.str() << "best H = " << run.result.best_window << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serpentine arm pose estimation pipeline"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string method = "prc-mlp";
  bool use_ridge = false;
  std::vector<int> windows;

  CLI::App* gen = app.add_subcommand("generate", "run simulated data-collection sessions");
  add_common(gen, opts);

  CLI::App* tr = app.add_subcommand("train", "train one estimator");
  add_common(tr, opts);
  tr->add_option("--method", method, "prc-mlp | prc-lin | no-load | lstm");
  tr->add_flag("--ridge", use_ridge, "closed-form fit for prc-lin instead of gradient training");

  CLI::App* ev = app.add_subcommand("evaluate", "compare estimators on the test session");
  add_common(ev, opts);

  CLI::App* sw = app.add_subcommand("sweep", "train prc-mlp across window sizes");
  add_common(sw, opts);
  sw->add_option("--windows", windows, "window sizes H to sweep");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(opts);
    if (tr->parsed()) return cmd_train(opts, method, use_ridge);
    if (ev->parsed()) return cmd_evaluate(opts);
    if (sw->parsed()) return cmd_sweep(opts, windows);
  } catch (const std::exception& e) {
    json err;
    err["error"] = e.what();
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
