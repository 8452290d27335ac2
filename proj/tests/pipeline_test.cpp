#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "stackml/error.hpp"
#include "stackml/pipeline.hpp"
#include "stackml/synthetic.hpp"

using namespace stackml;
using namespace stackml::testing;

namespace {

// Small and quick: forests and boosters trimmed, everything else default.
ExperimentConfig quick_config() {
  auto c = parse_config(
      "rf.n_trees = 15\n"
      "etc.n_trees = 15\n"
      "gbm.n_stages = 20\n"
      "xgb.n_stages = 20\n"
      "adb.n_stages = 20\n"
      "mlp.epochs = 100\n");
  return c;
}

double accuracy_of(const EvaluationResult& r) { return r.rows.front().accuracy; }

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("synthetic records follow the heart schema") {
  const auto d = synthesize_heart_like(400, 3);
  CHECK(d.rows() == 400);
  CHECK(d.cols() == 11);
  for (Eigen::Index j = 0; j < d.cols(); ++j) {
    const auto& col = d.schema.columns[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
      if (!col.categories.empty()) {
        CHECK(std::find(col.categories.begin(), col.categories.end(), d.features(i, j)) !=
              col.categories.end());
      }
    }
  }
  const auto counts = d.class_counts();
  CHECK(counts[0] > 100);
  CHECK(counts[1] > 100);
  CHECK(synthesize_heart_like(50, 3).features == synthesize_heart_like(50, 3).features);
}

TEST_CASE("prep") {
  const auto raw = synthesize_heart_like(300, 4);
  SUBCASE("infinite threshold keeps every row") {
    const auto out = prepare(raw, std::numeric_limits<double>::infinity());
    CHECK(out.kept.rows() == raw.rows());
    CHECK(out.removed_row_ids.empty());
  }
  SUBCASE("summary lists the removed rows") {
    auto spiked = raw;
    spiked.features(17, 4) = 5000;  // cholesterol far outside the rest
    const auto out = prepare(spiked, 3.0);
    CHECK(std::find(out.removed_row_ids.begin(), out.removed_row_ids.end(), 17) !=
          out.removed_row_ids.end());
    CHECK(out.kept.rows() + static_cast<Eigen::Index>(out.removed_row_ids.size()) == raw.rows());
    const auto summary = prep_summary(out, LoadStats{300, 0}, 3.0);
    CHECK(summary.find("\"rows_read\": 300") != std::string::npos);
    CHECK(summary.find("\"removed_row_ids\"") != std::string::npos);
    CHECK(summary.find("cholesterol") != std::string::npos);
  }
}

TEST_CASE("train splits, filters and fits") {
  const auto raw = synthesize_heart_like(300, 5);
  auto config = quick_config();

  SUBCASE("safe order filters training rows only") {
    const auto out = train_experiment(config, raw);
    const auto counts = raw.class_counts();
    const auto test_counts = out.test.class_counts();
    CHECK(test_counts[0] == static_cast<int>(std::nearbyint(counts[0] * 0.2)));
    CHECK(test_counts[1] == static_cast<int>(std::nearbyint(counts[1] * 0.2)));
    CHECK(out.train.rows() + out.test.rows() +
              static_cast<Eigen::Index>(out.removed_row_ids.size()) ==
          raw.rows());
    std::set<std::size_t> test_ids(out.test.row_ids.begin(), out.test.row_ids.end());
    for (auto id : out.removed_row_ids) CHECK(test_ids.count(id) == 0);
    CHECK(out.model.fingerprint.rows == static_cast<std::uint64_t>(out.train.rows()));
    CHECK(out.model.fingerprint.seed == 42);
    CHECK(out.model.fingerprint.config_hash == config_hash(config));
    CHECK(std::get<StackedModel>(out.model.model).layout.size() == 9);
  }
  SUBCASE("paper order filters before the split") {
    config.order = PipelineOrder::paper;
    const auto out = train_experiment(config, raw);
    const auto prep = prepare(raw, config.z_threshold);
    CHECK(out.removed_row_ids == prep.removed_row_ids);
    CHECK(out.train.rows() + out.test.rows() == prep.kept.rows());
  }
  SUBCASE("same inputs give byte-identical model files at any thread count") {
    const auto a = serialize_model_file(train_experiment(config, raw, Parallelism{1}).model);
    const auto b = serialize_model_file(train_experiment(config, raw, Parallelism{4}).model);
    CHECK(a == b);
    set_seed(config, 43);
    CHECK(serialize_model_file(train_experiment(config, raw).model) != a);
  }
  SUBCASE("single-learner roster") {
    config.roster = {LearnerKind::CART};
    const auto out = train_experiment(config, raw);
    CHECK(std::get<StackedModel>(out.model.model).layout == std::vector<std::string>{"CART"});
  }
  SUBCASE("k beyond the smallest class is a data-shape error") {
    config.k_folds = 500;
    CHECK_THROWS_AS(train_experiment(config, raw), DataShapeError);
  }
}

TEST_CASE("evaluate") {
  const auto raw = synthesize_heart_like(300, 6);
  const auto trained = train_experiment(quick_config(), raw);
  const auto held = evaluate_model(trained.model, trained.test, MetricsMode::standard);
  REQUIRE(held.rows.size() == 10);
  CHECK(held.rows[0].model_name == "Stacked");
  std::vector<std::string> names;
  for (std::size_t i = 1; i < held.rows.size(); ++i) names.push_back(held.rows[i].model_name);
  CHECK(names == std::vector<std::string>{"RF", "MLP", "KNN", "ETC", "XGB", "SVC", "ADB", "CART",
                                          "GBM"});

  SUBCASE("training data scores at least as well as held-out data") {
    const auto own = evaluate_model(trained.model, trained.train, MetricsMode::standard);
    CHECK(accuracy_of(own) >= accuracy_of(held));
  }
  SUBCASE("paper metrics score thresholded labels") {
    const auto paper = evaluate_model(trained.model, trained.test, MetricsMode::paper);
    for (const auto& row : paper.rows) {
      CHECK(row.roc == doctest::Approx((row.sensitivity + row.specificity) / 2));
    }
  }
  SUBCASE("loaded model reproduces the predictions") {
    const auto loaded = parse_model_file(serialize_model_file(trained.model));
    const auto again = evaluate_model(loaded, trained.test, MetricsMode::standard);
    for (std::size_t m = 0; m < held.scored.scores.size(); ++m) {
      CHECK(again.scored.scores[m].positive == held.scored.scores[m].positive);
    }
  }
  SUBCASE("records without a target cannot be evaluated") {
    auto unlabeled = trained.test;
    unlabeled.labels.resize(0);
    CHECK_THROWS_AS(evaluate_model(trained.model, unlabeled, MetricsMode::standard), InputError);
  }
  SUBCASE("result files and report") {
    TempDir dir;
    write_evaluation_results(dir / "res", held, MetricsMode::standard);
    const auto written = write_report(dir / "res", dir / "rep", ReportOptions{ReportFormat::csv, "", ""});
    CHECK(written.size() == 5);
    const auto table = lines(read_text(dir / "rep" / "table.csv"));
    REQUIRE(table.size() == 11);
    CHECK(table[0] == "model,accuracy,prc,sensitivity,specificity,f1,roc,log_loss,mcc");
    // Values re-parse to the reported metrics at six decimals.
    std::stringstream first(table[1]);
    std::string cell;
    std::getline(first, cell, ',');
    CHECK(cell == "Stacked");
    const auto values = metric_values(held.rows[0]);
    for (double v : values) {
      std::getline(first, cell, ',');
      CHECK(std::abs(std::stod(cell) - v) <= 5e-7);
    }
    const auto confusion_rows = lines(read_text(dir / "rep" / "confusion.csv"));
    CHECK(confusion_rows.size() == 11);
    const auto scatter = lines(read_text(dir / "rep" / "scatter.csv"));
    CHECK(scatter[0] == "row_id,age,resting bp s,label,predicted");
    CHECK(scatter.size() == static_cast<std::size_t>(trained.test.rows()) + 1);
    const auto roc = lines(read_text(dir / "rep" / "roc_points.csv"));
    CHECK(roc[1].starts_with("Stacked,inf,0.000000,0.000000"));

    write_report(dir / "res", dir / "md", ReportOptions{ReportFormat::md, "max heart rate", "oldpeak"});
    const auto md = lines(read_text(dir / "md" / "table.md"));
    CHECK(md.size() == 12);
    CHECK(md[0] == "| Model | Accuracy | PRC | Sensitivity | Specificity | F1 Score | ROC | Log_Loss | MCC |");
    CHECK(lines(read_text(dir / "md" / "scatter.md"))[0] ==
          "| row_id | max heart rate | oldpeak | label | predicted |");
  }
  SUBCASE("missing results") {
    TempDir dir;
    CHECK_THROWS_AS(write_report(dir.path(), dir / "out", {}), InputError);
    CHECK_THROWS_AS(write_report(dir / "absent", dir / "out", {}), InputError);
  }
}

TEST_CASE("cross-validation") {
  const auto raw = synthesize_heart_like(120, 8);
  auto config = quick_config();
  config.k_folds = 2;
  const auto a = cross_validate(config, raw, Parallelism{1});
  REQUIRE(a.mean.size() == 10);
  CHECK(a.per_fold.size() == 2);
  CHECK(a.scored.fold.size() == 120);
  for (int f = 0; f < 2; ++f) {
    const auto n = std::count(a.scored.fold.begin(), a.scored.fold.end(), f);
    CHECK(n == 60);
  }
  for (std::size_t m = 0; m < a.mean.size(); ++m) {
    const double acc0 = a.per_fold[0][m].accuracy;
    const double acc1 = a.per_fold[1][m].accuracy;
    CHECK(a.mean[m].accuracy == doctest::Approx((acc0 + acc1) / 2));
    CHECK(a.stddev[m].accuracy == doctest::Approx(std::abs(acc0 - acc1) / std::sqrt(2.0)));
  }

  TempDir dir;
  const auto b = cross_validate(config, raw, Parallelism{3});
  write_cv_results(dir / "a", a, config.metrics_mode, config.k_folds);
  write_cv_results(dir / "b", b, config.metrics_mode, config.k_folds);
  for (const char* name : {"run.json", "metrics.csv", "metrics_std.csv", "fold_metrics.csv",
                           "predictions.csv", "records.csv"}) {
    CHECK(read_text(dir / "a" / name) == read_text(dir / "b" / name));
  }
  write_report(dir / "a", dir / "rep", ReportOptions{ReportFormat::md, "", ""});
  const auto md = lines(read_text(dir / "rep" / "table.md"));
  REQUIRE(md.size() == 12);
  CHECK(md[2].starts_with("| Stacked | "));
  CHECK(std::count(md[2].begin(), md[2].end(), '|') == 10);
}
