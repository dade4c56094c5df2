#include <catch2/catch_amalgamated.hpp>

#include "serp/evaluation.hpp"

using namespace serp;

TEST_CASE("marker_error basic cases") {
  Mat truth = Mat::Random(20, 27);
  ErrorReport zero = marker_error(truth, truth);
  REQUIRE(zero.mean_mm == 0.0);
  REQUIRE(zero.std_mm == 0.0);
  REQUIRE(zero.mse_mm2 == 0.0);

  // uniform 1 mm x-offset on every marker
  Mat pred = truth;
  for (int k = 0; k < 9; ++k) pred.col(3 * k).array() += 1.0;
  ErrorReport offset = marker_error(pred, truth);
  REQUIRE(offset.mean_mm == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(offset.std_mm == Catch::Approx(0.0).margin(1e-12));

  // one marker off by 3 mm, eight exact
  Mat one = truth;
  one.col(0).array() += 3.0;
  ErrorReport single = marker_error(one, truth);
  REQUIRE(single.mean_mm == Catch::Approx(3.0 / 9.0).margin(1e-12));
  REQUIRE(single.per_marker_mean_mm[0] == Catch::Approx(3.0).margin(1e-12));
  REQUIRE(single.per_marker_mean_mm[1] == 0.0);

  REQUIRE_THROWS_AS(marker_error(Mat::Zero(5, 27), Mat::Zero(6, 27)), ShapeError);
}

TEST_CASE("marker_error invariant under common rigid translation") {
  Mat truth = Mat::Random(30, 27);
  Mat pred = truth + 0.5 * Mat::Random(30, 27);
  ErrorReport base = marker_error(pred, truth);

  Vec3 shift(12.0, -7.0, 3.0);
  Mat t_truth = truth, t_pred = pred;
  for (int k = 0; k < 9; ++k)
    for (int a = 0; a < 3; ++a) {
      t_truth.col(3 * k + a).array() += shift[a];
      t_pred.col(3 * k + a).array() += shift[a];
    }
  ErrorReport shifted = marker_error(t_pred, t_truth);
  REQUIRE(shifted.mean_mm == Catch::Approx(base.mean_mm).margin(1e-9));
  REQUIRE(shifted.std_mm == Catch::Approx(base.std_mm).margin(1e-9));
}

TEST_CASE("compare_methods deterministic ordering and purity") {
  Mat truth = Mat::Random(10, 27);
  std::map<std::string, Mat> preds;
  preds["prc-mlp"] = truth;
  preds["analytical"] = truth;
  preds["lstm"] = truth;

  ComparisonTable t1 = compare_methods(preds, truth);
  ComparisonTable t2 = compare_methods(preds, truth);
  REQUIRE(t1.format() == t2.format());
  for (const auto& [name, r] : t1.rows) REQUIRE(r.mean_mm == 0.0);

  // rows iterate in name order
  std::vector<std::string> names;
  for (const auto& [name, r] : t1.rows) names.push_back(name);
  REQUIRE(std::is_sorted(names.begin(), names.end()));
}

TEST_CASE("sweep result argmin") {
  SweepResult s;
  s.points = {{1, 0.5, false}, {2, 0.3, false}, {4, 0.1, false}, {8, 0.2, true}};
  s.finalize();
  REQUIRE(s.best_window == 4);

  // diverged points are skipped even when numerically smallest
  SweepResult d;
  d.points = {{1, 0.5, false}, {2, 0.0, true}};
  d.finalize();
  REQUIRE(d.best_window == 1);
}
