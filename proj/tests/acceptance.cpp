// Acceptance suite: one pass/fail line per criterion. Exact-math and
// gradient checks run at tight tolerances; the learned-method structure
// checks run on the default-seed desk profile.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "serp/experiment.hpp"

using namespace serp;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s  %-28s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void coupling_algebra() {
  auto t0 = std::chrono::steady_clock::now();
  Mat a = coupling_matrix(9);
  double inv_err = (a * a.inverse() - Mat::Identity(9, 9)).cwiseAbs().maxCoeff();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> d(-10.0, 10.0);
  double rt_err = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    Vec v(9);
    for (int j = 0; j < 9; ++j) v[j] = d(rng);
    rt_err = std::max(rt_err, (motor_to_joint(joint_to_motor(v)) - v).cwiseAbs().maxCoeff());
  }
  double elapsed = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "inv %.2e, roundtrip %.2e (tol 1e-12), %.2fs (budget 1s)",
                inv_err, rt_err, elapsed);
  report("coupling-algebra", inv_err < 1e-12 && rt_err < 1e-12 && elapsed < 1.0, buf);
}

void fk_ik_roundtrip() {
  ArmGeometry g = ArmGeometry::standard();
  std::mt19937_64 rng(102);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    Vec q(9);
    for (int j = 0; j < 9; ++j) q[j] = d(rng);
    Vec back = joints_from_markers(forward_kinematics(q, g), g);
    worst = std::max(worst, (back - q).cwiseAbs().maxCoeff());
  }
  ArmGeometry bare = ArmGeometry::standard(545.0, 0.0);
  double tip = forward_kinematics(Vec::Zero(9), bare).positions[8].norm();
  char buf[160];
  std::snprintf(buf, sizeof(buf), "roundtrip %.2e rad (tol 1e-6), tip %.12f mm (545 +- 1e-9)",
                worst, tip);
  report("fk-ik-roundtrip", worst < 1e-6 && std::abs(tip - 545.0) < 1e-9, buf);
}

void ideal_limit() {
  PlantConfig cfg;
  cfg.backlash_width = 0.0;
  cfg.compliance_per_joint = 0.0;
  cfg.deformation_sigma = 0.0;
  cfg.load_noise_sigma = 0.0;
  cfg.quantization_step = 0.0;
  SessionLog log = run_session(cfg, 301, 2100);
  ErrorReport r = marker_error(analytical_estimate(log, cfg.geometry), log.markers);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "analytical mean %.2e mm over 2100 steps (tol 1e-6)", r.mean_mm);
  report("ideal-limit-exactness", r.mean_mm < 1e-6, buf);
}

void embedding_dims() {
  PlantConfig plant;
  SessionLog log = run_session(plant, 303, 40);
  Normalizer norm = fit_normalizer({log});
  bool ok = true;
  for (int h = 1; h <= 16; ++h) {
    if (embed(log, h, norm).inputs.cols() != 27 * h - 9) ok = false;
    if (embed(log, h, norm, 0, false).inputs.cols() != 18 * h - 9) ok = false;
  }
  report("embedding-dimension", ok, "27H-9 and 18H-9 for H in 1..16");
}

void gradient_correctness() {
  auto t0 = std::chrono::steady_clock::now();
  auto check = [](Model& model, const Mat& x, const Mat& y) {
    Vec grad;
    model.loss_and_grad(x, y, grad);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < grad.size(); ++i) {
      const double saved = model.params()[i];
      model.params()[i] = saved + 1e-5;
      const double up = model.mse(x, y);
      model.params()[i] = saved - 1e-5;
      const double down = model.mse(x, y);
      model.params()[i] = saved;
      const double fd = (up - down) / 2e-5;
      const double denom = std::max({std::abs(grad[i]), std::abs(fd), 1e-8});
      worst = std::max(worst, std::abs(grad[i] - fd) / denom);
    }
    return worst;
  };
  MlpReadout mlp({6, 8, 5, 3});
  mlp.init_weights(401);
  double mlp_err = check(mlp, Mat::Random(10, 6), Mat::Random(10, 3));
  LstmBaseline lstm(5, 3, 4, 2);
  lstm.init_weights(402);
  double lstm_err = check(lstm, Mat::Random(8, 15), Mat::Random(8, 2));
  double elapsed = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "mlp %.2e, lstm %.2e (tol 1e-4), %.2fs (budget 30s)", mlp_err,
                lstm_err, elapsed);
  report("gradient-correctness", mlp_err < 1e-4 && lstm_err < 1e-4 && elapsed < 30.0, buf);
}

void readout_equivalence() {
  std::mt19937_64 rng(501);
  Mat x = Mat::Random(500, 12), w_true = Mat::Random(12, 4);
  Mat y = x * w_true + 0.05 * Mat::Random(500, 4);
  Mat vx = Mat::Random(120, 12), vy = vx * w_true + 0.05 * Mat::Random(120, 4);

  LinearReadout closed = ridge_fit(x, y, 0.0);
  const double closed_mse = (closed.predict(x) - y).squaredNorm() / (500.0 * 4.0);

  MlpReadout linear({12, 4});
  linear.init_weights(502);
  TrainConfig cfg;
  cfg.batch_size = 64;
  cfg.seed = 503;
  cfg.max_epochs = 400;
  train(linear, x, y, vx, vy, cfg);
  const double trained_mse = linear.mse(x, y);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "gradient %.6e vs ridge %.6e (within 1%%)", trained_mse,
                closed_mse);
  report("readout-equivalence", trained_mse <= closed_mse * 1.01, buf);
}

void table_structure(const ExperimentConfig& cfg, const DatasetBundle& bundle) {
  auto t0 = std::chrono::steady_clock::now();
  const SessionLog& test_log = bundle.test.front();
  ErrorReport analytical =
      marker_error(analytical_estimate(test_log, cfg.plant.geometry), test_log.markers);

  auto run = [&](Method m) {
    TrainedMethod trained = train_method(m, cfg, bundle, cfg.window);
    Mat pred = predict_markers(trained.checkpoint, cfg, test_log);
    return marker_error(pred, aligned_truth(test_log, cfg.window));
  };
  ErrorReport mlp = run(Method::PrcMlp);
  ErrorReport lin = run(Method::PrcLin);
  ErrorReport lstm = run(Method::Lstm);

  double elapsed = seconds_since(t0);
  bool a = analytical.mean_mm >= 3.0 * mlp.mean_mm;
  bool b = mlp.mean_mm <= lin.mean_mm;
  bool c = mlp.mean_mm <= 1.15 * lstm.mean_mm && lstm.mean_mm <= 1.15 * mlp.mean_mm;
  char buf[240];
  std::snprintf(buf, sizeof(buf),
                "analytical %.2f, mlp %.2f, lin %.2f, lstm %.2f mm; "
                "(a)%s (b)%s (c)%s; %.0fs (budget 1800s)",
                analytical.mean_mm, mlp.mean_mm, lin.mean_mm, lstm.mean_mm, a ? "ok" : "FAIL",
                b ? "ok" : "FAIL", c ? "ok" : "FAIL", elapsed);
  report("table-structure", a && b && c && elapsed < 1800.0, buf);
}

void sweep_structure(const ExperimentConfig& cfg, const DatasetBundle& bundle) {
  auto t0 = std::chrono::steady_clock::now();
  SweepRun run = sweep_windows(cfg, bundle, {1, 2, 4, 8, 16});
  double at_one = 0.0, best = 0.0;
  for (const SweepPoint& p : run.result.points) {
    if (p.window == 1) at_one = p.val_loss;
    if (p.window == run.result.best_window) best = p.val_loss;
  }
  double elapsed = seconds_since(t0);
  bool ok = run.result.best_window != 1 && best < at_one && elapsed < 3600.0;
  char buf[240];
  std::snprintf(buf, sizeof(buf), "best H=%d (loss %.3e) vs H=1 (loss %.3e); %.0fs (budget 3600s)",
                run.result.best_window, best, at_one, elapsed);
  report("sweep-structure", ok, buf);
}

void determinism() {
  auto run_once = [](const std::filesystem::path& dir) {
    ExperimentConfig cfg = make_profile("ci");
    cfg.out_dir = dir.string();
    generate_sessions(cfg);
    DatasetBundle bundle = make_bundle(load_sessions(cfg), cfg.burnin);
    TrainedMethod trained = train_method(Method::PrcMlp, cfg, bundle, cfg.window);
    const SessionLog& test_log = bundle.test.front();
    Mat pred = predict_markers(trained.checkpoint, cfg, test_log);
    ErrorReport r = marker_error(pred, aligned_truth(test_log, cfg.window));
    json report_json;
    report_json["mean_mm"] = r.mean_mm;
    report_json["std_mm"] = r.std_mm;
    report_json["weights_hash"] =
        fnv1a(std::string(reinterpret_cast<const char*>(trained.checkpoint.weights.data()),
                          trained.checkpoint.weights.size() * sizeof(double)));
    std::string session_csv = io_detail::read_text(sessions_dir(cfg) / "session_00.csv");
    report_json["session_hash"] = fnv1a(session_csv);
    return fnv1a(report_json.dump());
  };
  std::filesystem::path base = std::filesystem::temp_directory_path() / "serp_acceptance_det";
  std::filesystem::remove_all(base);
  std::uint64_t h1 = run_once(base / "run1");
  std::uint64_t h2 = run_once(base / "run2");
  std::filesystem::remove_all(base);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "report hash %016llx == %016llx",
                static_cast<unsigned long long>(h1), static_cast<unsigned long long>(h2));
  report("determinism", h1 == h2, buf);
}

void hysteresis_properties() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(601);
  std::uniform_real_distribution<double> d(-0.2, 0.2);
  std::uniform_real_distribution<double> wd(0.01, 0.3);
  bool ok = true;
  for (int seq = 0; seq < 10000 && ok; ++seq) {
    const double w = wd(rng);
    double x = 0.0, y = 0.0;
    for (int t = 0; t < 20; ++t) {
      const double dx = d(rng);
      x += dx;
      const double ny = play_operator(y, x, w);
      if (std::abs(ny - y) > std::abs(dx) + 1e-12) ok = false;          // 1-Lipschitz
      if (std::abs(x - y) <= w / 2 && ny != y) ok = false;              // dead zone
      if (std::abs(x - ny) > w / 2 + 1e-12) ok = false;                 // tracking bound
      y = ny;
    }
  }
  double elapsed = seconds_since(t0);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "10000 random sequences, %.2fs (budget 5s)", elapsed);
  report("hysteresis-properties", ok && elapsed < 5.0, buf);
}

}  // namespace

int main(int argc, char** argv) {
  std::string profile = "desk";
  for (int i = 1; i + 1 < argc; i += 2)
    if (std::string(argv[i]) == "--profile") profile = argv[i + 1];

  coupling_algebra();
  fk_ik_roundtrip();
  ideal_limit();
  embedding_dims();
  gradient_correctness();
  readout_equivalence();
  determinism();
  hysteresis_properties();

  // shared desk-profile dataset for the learned-method criteria
  ExperimentConfig cfg = make_profile(profile);
  std::vector<SessionLog> logs;
  for (int i = 0; i < cfg.sessions; ++i)
    logs.push_back(
        run_session(cfg.plant, derive_session_seed(cfg.master_seed, i), cfg.steps,
                    cfg.target_refresh));
  DatasetBundle bundle = make_bundle(logs, cfg.burnin);
  table_structure(cfg, bundle);
  sweep_structure(cfg, bundle);

  std::printf("%s (%d failure%s)\n", failures == 0 ? "ALL CRITERIA PASSED" : "CRITERIA FAILED",
              failures, failures == 1 ? "" : "s");
  return failures == 0 ? 0 : 1;
}
