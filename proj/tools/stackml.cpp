#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "stackml/config.hpp"
#include "stackml/error.hpp"
#include "stackml/pipeline.hpp"
#include "stackml/serialization.hpp"

namespace fs = std::filesystem;
using namespace stackml;

namespace {

enum Exit { kOk = 0, kFailure = 1, kInput = 2, kShape = 3, kModelFile = 4 };

struct Globals {
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  bool paper_order = false;
  bool paper_metrics = false;
  int threads = 0;
};

ExperimentConfig resolve_config(const Globals& g, const std::optional<fs::path>& data) {
  auto config = g.config ? load_config(*g.config) : default_config();
  if (g.seed) set_seed(config, *g.seed);
  if (g.paper_order) config.order = PipelineOrder::paper;
  if (g.paper_metrics) config.metrics_mode = MetricsMode::paper;
  if (data) config.data_path = *data;
  validate_config(config);
  return config;
}

Parallelism parallelism(const Globals& g) {
  if (g.threads > 0) return {g.threads};
  return {static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))};
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
  if (!out.flush()) throw InputError("failed writing '" + path.string() + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stacked-ensemble heart disease classifier"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "Experiment config file (key = value)")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Override the experiment seed");
  app.add_flag("--paper-order", g.paper_order,
               "Remove outliers from the full table before splitting");
  app.add_flag("--paper-metrics", g.paper_metrics,
               "Score ROC and log-loss on thresholded labels");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")
      ->check(CLI::NonNegativeNumber);

  // prep
  auto* prep = app.add_subcommand("prep", "Clean a dataset: drop incomplete rows and z-score outliers");
  fs::path prep_in, prep_out;
  std::optional<fs::path> prep_summary_path;
  std::optional<double> prep_z;
  prep->add_option("--input", prep_in, "Raw CSV")->required();
  prep->add_option("--output", prep_out, "Cleaned CSV")->required();
  prep->add_option("--summary", prep_summary_path, "Summary JSON (default: <output>.summary.json)");
  prep->add_option("--z-threshold", prep_z, "Override prep.z_threshold");

  // train
  auto* train = app.add_subcommand("train", "Split, preprocess and fit the stacked ensemble");
  std::optional<fs::path> train_data, train_test_out;
  fs::path train_model_out;
  train->add_option("--data", train_data, "Dataset CSV (overrides data.path)");
  train->add_option("--model-out", train_model_out, "Model file to write")->required();
  train->add_option("--test-out", train_test_out, "Write the held-out rows here");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score a model file on labelled records");
  fs::path eval_model, eval_data, eval_out;
  evaluate->add_option("--model", eval_model, "Model file")->required();
  evaluate->add_option("--data", eval_data, "Labelled CSV")->required();
  evaluate->add_option("--out", eval_out, "Results directory")->required();

  // cv
  auto* cv = app.add_subcommand("cv", "Stratified k-fold evaluation of every learner and the stack");
  std::optional<fs::path> cv_data;
  fs::path cv_out;
  cv->add_option("--data", cv_data, "Dataset CSV (overrides data.path)");
  cv->add_option("--out", cv_out, "Results directory")->required();

  // report
  auto* report = app.add_subcommand("report", "Write table and figure data from a results directory");
  fs::path report_results;
  std::optional<fs::path> report_out;
  std::string report_format = "md";
  ReportOptions report_options;
  report->add_option("--results", report_results, "Directory written by evaluate or cv")->required();
  report->add_option("--out", report_out, "Output directory (default: <results>/report)");
  report->add_option("--format", report_format, "csv or md")
      ->check(CLI::IsMember({"csv", "md"}));
  report->add_option("--scatter-x", report_options.scatter_x, "Feature for the scatter x axis");
  report->add_option("--scatter-y", report_options.scatter_y, "Feature for the scatter y axis");

  // predict
  auto* predict = app.add_subcommand("predict", "Write P(1) and the predicted class for each row");
  fs::path predict_model, predict_in, predict_out;
  double predict_threshold = 0.5;
  predict->add_option("--model", predict_model, "Model file")->required();
  predict->add_option("--input", predict_in, "CSV with the feature columns")->required();
  predict->add_option("--output", predict_out, "Predictions CSV")->required();
  predict->add_option("--threshold", predict_threshold, "Decision threshold")
      ->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInput;
  }

  try {
    if (prep->parsed()) {
      auto config = g.config ? resolve_config(g, std::nullopt) : default_config();
      const double z = prep_z.value_or(config.z_threshold);
      LoadStats load;
      const auto raw = load_csv(prep_in, heart_schema(), config.columns, &load);
      const auto result = prepare(raw, z);
      write_csv(prep_out, result.kept);
      const auto summary_path =
          prep_summary_path.value_or(fs::path(prep_out.string() + ".summary.json"));
      write_file(summary_path, prep_summary(result, load, z));
      std::cout << "rows read " << load.rows_read << ", dropped (missing) "
                << load.rows_dropped_missing << ", removed (|z| > " << z << ") "
                << result.removed_row_ids.size() << ", kept " << result.kept.rows() << "\n";
    } else if (train->parsed()) {
      const auto config = resolve_config(g, train_data);
      const auto raw = load_experiment_data(config);
      const auto outcome = train_experiment(config, raw, parallelism(g));
      save_model(outcome.model, train_model_out);
      if (train_test_out) write_csv(*train_test_out, outcome.test);
      const auto counts = outcome.train.class_counts();
      std::cout << "records " << raw.rows() << ", outliers removed "
                << outcome.removed_row_ids.size() << ", train " << outcome.train.rows() << " ("
                << counts[1] << " positive), test " << outcome.test.rows() << "\n"
                << "stacked " << roster_specs(config).size() << " learners with "
                << config.k_folds << "-fold out-of-fold meta-features, seed " << config.seed
                << "\nmodel written to " << train_model_out.string() << "\n";
    } else if (evaluate->parsed()) {
      const auto config = resolve_config(g, std::nullopt);
      const auto model = load_model(eval_model);
      const auto records = load_csv(eval_data, model.standardizer.schema(), config.columns);
      const auto result = evaluate_model(model, records, config.metrics_mode);
      write_evaluation_results(eval_out, result, config.metrics_mode);
      std::cout << metrics_table(result.rows);
    } else if (cv->parsed()) {
      const auto config = resolve_config(g, cv_data);
      const auto raw = load_experiment_data(config);
      const auto result = cross_validate(config, raw, parallelism(g));
      write_cv_results(cv_out, result, config.metrics_mode, config.k_folds);
      std::cout << metrics_table(result.mean, &result.stddev);
    } else if (report->parsed()) {
      report_options.format = report_format == "csv" ? ReportFormat::csv : ReportFormat::md;
      const auto out = report_out.value_or(report_results / "report");
      for (const auto& path : write_report(report_results, out, report_options)) {
        std::cout << path.string() << "\n";
      }
    } else if (predict->parsed()) {
      const auto config = resolve_config(g, std::nullopt);
      const auto model = load_model(predict_model);
      const auto rows = load_csv(predict_in, model.standardizer.schema(), config.columns, nullptr,
                                 TargetColumn::optional);
      if (rows.cols() != model.standardizer.schema().feature_count()) {
        throw DataShapeError("input width does not match the model");
      }
      const auto p = predict_proba(model.model, model.standardizer.transform(rows.features));
      std::string text = "row_id,probability,prediction\n";
      for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        text += std::to_string(rows.row_ids[static_cast<std::size_t>(i)]) + "," +
                format_real(p(i, 1)) + "," + (p(i, 1) >= predict_threshold ? "1" : "0") + "\n";
      }
      write_file(predict_out, text);
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const DataShapeError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kShape;
  } catch (const ModelFileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kModelFile;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}
