#include "stackml/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "stackml/error.hpp"
#include "stackml/random.hpp"
#include "stackml/stacking.hpp"

namespace stackml {

using Json = nlohmann::ordered_json;

namespace {

std::vector<std::size_t> row_ids_at(const LabeledDataset& data, const std::vector<int>& positions) {
  std::vector<std::size_t> out;
  for (int p : positions) out.push_back(data.row_ids[static_cast<std::size_t>(p)]);
  return out;
}

struct FittedSplit {
  LabeledDataset train;
  std::vector<std::size_t> removed;
};

// Safe order only: outlier statistics from the training rows themselves.
FittedSplit filter_training_rows(const ExperimentConfig& config, LabeledDataset train) {
  if (config.order != PipelineOrder::safe) return {std::move(train), {}};
  auto filtered = filter_outliers_zscore(train, config.z_threshold);
  auto removed = row_ids_at(train, filtered.removed);
  if (filtered.kept.empty()) throw DataShapeError("outlier filter removed every training row");
  return {std::move(filtered.kept), std::move(removed)};
}

std::vector<ModelScores> score_all(const TrainedModel& model, const Eigen::MatrixXd& x) {
  std::vector<ModelScores> out;
  if (const auto* stack = std::get_if<StackedModel>(&model)) {
    out.push_back({kStackedName, predict_proba(*stack, x).col(1)});
    const Eigen::MatrixXd base = base_predictions(*stack, x);
    for (std::size_t j = 0; j < stack->layout.size(); ++j) {
      out.push_back({stack->layout[j], base.col(static_cast<Eigen::Index>(j))});
    }
  } else {
    const auto& learner = std::get<LearnerModel>(model);
    const std::string name = std::visit(
        [](const auto& m) -> std::string {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, CartModel>) return "CART";
          else if constexpr (std::is_same_v<M, ForestModel>)
            return m.kind == ForestKind::random_forest ? "RF" : "ETC";
          else if constexpr (std::is_same_v<M, AdaBoostModel>) return "ADB";
          else if constexpr (std::is_same_v<M, GbmModel>) return "GBM";
          else if constexpr (std::is_same_v<M, XgbModel>) return "XGB";
          else if constexpr (std::is_same_v<M, KnnModel>) return "KNN";
          else if constexpr (std::is_same_v<M, LinearModel>)
            return m.kind == LinearKind::svc ? "SVC" : "LR";
          else return "MLP";
        },
        learner);
    out.push_back({name, predict_proba(learner, x).col(1)});
  }
  return out;
}

void check_records(const ModelFile& model, const LabeledDataset& records) {
  if (records.cols() != model.standardizer.schema().feature_count()) {
    throw DataShapeError("records have " + std::to_string(records.cols()) +
                         " features, the model expects " +
                         std::to_string(model.standardizer.schema().feature_count()));
  }
}

}  // namespace

LabeledDataset load_experiment_data(const ExperimentConfig& config, LoadStats* stats) {
  if (config.data_path.empty()) throw InputError("no dataset given (data.path or --data)");
  return load_csv(config.data_path, heart_schema(), config.columns, stats);
}

PrepOutcome prepare(const LabeledDataset& raw, double z_threshold) {
  if (!(z_threshold > 0)) throw InputError("z threshold must be positive");
  PrepOutcome out;
  out.stats = compute_column_stats(raw);
  auto filtered = filter_outliers_zscore(raw, z_threshold, out.stats);
  out.removed_row_ids = row_ids_at(raw, filtered.removed);
  out.kept = std::move(filtered.kept);
  return out;
}

std::string prep_summary(const PrepOutcome& prep, const LoadStats& load, double z_threshold) {
  Json columns = Json::array();
  for (std::size_t c = 0; c < prep.stats.columns.size(); ++c) {
    const int j = prep.stats.columns[c];
    columns.push_back(Json{{"column", prep.kept.schema.columns[static_cast<std::size_t>(j)].name},
                           {"mean", prep.stats.mean[c]},
                           {"stddev", prep.stats.stddev[c]}});
  }
  Json summary{{"rows_read", load.rows_read},
               {"rows_dropped_missing", load.rows_dropped_missing},
               {"z_threshold", std::isinf(z_threshold) ? Json("inf") : Json(z_threshold)},
               {"rows_removed", prep.removed_row_ids.size()},
               {"removed_row_ids", prep.removed_row_ids},
               {"rows_kept", prep.kept.rows()},
               {"column_stats", std::move(columns)}};
  return summary.dump(2) + "\n";
}

TrainOutcome train_experiment(const ExperimentConfig& config, const LabeledDataset& raw,
                              Parallelism parallelism) {
  validate_config(config);
  TrainOutcome out;
  LabeledDataset pool = raw;
  if (config.order == PipelineOrder::paper) {
    auto prep = prepare(raw, config.z_threshold);
    pool = std::move(prep.kept);
    out.removed_row_ids = std::move(prep.removed_row_ids);
  }
  const auto split = train_test_split_stratified(pool.labels, config.test_fraction, config.seed);
  auto fitted = filter_training_rows(config, pool.subset(split.train));
  if (config.order == PipelineOrder::safe) out.removed_row_ids = std::move(fitted.removed);
  out.train = std::move(fitted.train);
  out.test = pool.subset(split.test);

  auto standardizer = Standardizer::fit(out.train);
  const Eigen::MatrixXd x = standardizer.transform(out.train.features);
  auto stack = fit_stacked_ensemble(x, out.train.labels, roster_specs(config), config.k_folds,
                                    config.seed, config.meta, parallelism);
  out.model.fingerprint = {config_hash(config), static_cast<std::uint64_t>(out.train.rows()),
                           config.seed};
  out.model.standardizer = std::move(standardizer);
  out.model.model = std::move(stack);
  return out;
}

EvaluationResult evaluate_model(const ModelFile& model, const LabeledDataset& records,
                                MetricsMode mode, double threshold) {
  check_records(model, records);
  if (records.labels.size() != records.rows()) {
    throw InputError("evaluation needs the target column");
  }
  EvaluationResult out;
  out.scored.records = records;
  out.scored.scores = score_all(model.model, model.standardizer.transform(records.features));
  for (const auto& s : out.scored.scores) {
    out.rows.push_back(evaluate_all(s.name, records.labels, s.positive, mode, threshold));
  }
  return out;
}

CvResult cross_validate(const ExperimentConfig& config, const LabeledDataset& raw,
                        Parallelism parallelism) {
  validate_config(config);
  LabeledDataset pool = raw;
  if (config.order == PipelineOrder::paper) pool = prepare(raw, config.z_threshold).kept;
  const auto plan = stratified_kfold(pool.labels, config.k_folds, config.seed);
  const auto specs = roster_specs(config);

  CvResult out;
  out.scored.records = pool;
  out.scored.fold = plan.assignment(static_cast<std::size_t>(pool.rows()));
  for (int f = 0; f < plan.k; ++f) {
    const auto& held = plan.folds[static_cast<std::size_t>(f)];
    const auto train = filter_training_rows(config, pool.subset(plan.complement(f))).train;
    const auto test = pool.subset(held);
    const auto standardizer = Standardizer::fit(train);
    const auto stack =
        fit_stacked_ensemble(standardizer.transform(train.features), train.labels, specs,
                             config.k_folds, derive_seed(config.seed, static_cast<std::uint64_t>(f) + 1),
                             config.meta, parallelism);
    const auto scores = score_all(TrainedModel{stack}, standardizer.transform(test.features));
    if (out.scored.scores.empty()) {
      for (const auto& s : scores) {
        out.scored.scores.push_back({s.name, Eigen::VectorXd::Zero(pool.rows())});
      }
    }
    std::vector<EvaluationRow> rows;
    for (std::size_t m = 0; m < scores.size(); ++m) {
      for (std::size_t i = 0; i < held.size(); ++i) {
        out.scored.scores[m].positive(held[i]) = scores[m].positive(static_cast<Eigen::Index>(i));
      }
      rows.push_back(evaluate_all(scores[m].name, test.labels, scores[m].positive,
                                  config.metrics_mode));
    }
    out.per_fold.push_back(std::move(rows));
  }

  const auto n_models = out.per_fold.front().size();
  const auto k = static_cast<double>(out.per_fold.size());
  for (std::size_t m = 0; m < n_models; ++m) {
    const auto n_metrics = metric_names().size();
    std::vector<double> mean(n_metrics, 0.0), sd(n_metrics, 0.0);
    for (const auto& fold : out.per_fold) {
      const auto v = metric_values(fold[m]);
      for (std::size_t j = 0; j < n_metrics; ++j) mean[j] += v[j] / k;
    }
    for (const auto& fold : out.per_fold) {
      const auto v = metric_values(fold[m]);
      for (std::size_t j = 0; j < n_metrics; ++j) sd[j] += (v[j] - mean[j]) * (v[j] - mean[j]);
    }
    for (auto& s : sd) s = k > 1 ? std::sqrt(s / (k - 1)) : 0.0;
    auto make = [&](const std::vector<double>& v) {
      EvaluationRow r;
      r.model_name = out.per_fold.front()[m].model_name;
      r.accuracy = v[0];
      r.prc = v[1];
      r.sensitivity = v[2];
      r.specificity = v[3];
      r.f1 = v[4];
      r.roc = v[5];
      r.log_loss = v[6];
      r.mcc = v[7];
      return r;
    };
    out.mean.push_back(make(mean));
    out.stddev.push_back(make(sd));
  }
  return out;
}

// ---- result files ----------------------------------------------------------

std::string fixed6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  std::string s(buf);
  return s == "-0.000000" ? "0.000000" : s;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
  if (!out.flush()) throw InputError("failed writing '" + path.string() + "'");
}

std::string metrics_csv(const std::vector<EvaluationRow>& rows) {
  std::string out = "model";
  for (const auto& name : metric_names()) out += "," + name;
  out += "\n";
  for (const auto& row : rows) {
    out += row.model_name;
    for (double v : metric_values(row)) out += "," + fixed6(v);
    out += "\n";
  }
  return out;
}

std::string predictions_csv(const ScoredRecords& s) {
  std::string out = "row_id,label";
  if (!s.fold.empty()) out += ",fold";
  for (const auto& m : s.scores) out += "," + m.name;
  out += "\n";
  for (Eigen::Index i = 0; i < s.records.rows(); ++i) {
    out += std::to_string(s.records.row_ids[static_cast<std::size_t>(i)]) + "," +
           std::to_string(s.records.labels(i));
    if (!s.fold.empty()) out += "," + std::to_string(s.fold[static_cast<std::size_t>(i)]);
    for (const auto& m : s.scores) out += "," + format_real(m.positive(i));
    out += "\n";
  }
  return out;
}

std::string records_csv(const LabeledDataset& data) {
  std::string out = "row_id";
  for (const auto& c : data.schema.columns) out += "," + c.name;
  out += "\n";
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    out += std::to_string(data.row_ids[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < data.cols(); ++j) out += "," + format_real(data.features(i, j));
    out += "\n";
  }
  return out;
}

Json run_json(const std::string& command, MetricsMode mode, double threshold,
              const ScoredRecords& s) {
  std::vector<std::string> models;
  for (const auto& m : s.scores) models.push_back(m.name);
  return Json{{"command", command},
              {"metrics_mode", mode == MetricsMode::paper ? "paper" : "standard"},
              {"threshold", threshold},
              {"records", s.records.rows()},
              {"models", models}};
}

void prepare_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create '" + dir.string() + "': " + ec.message());
}

}  // namespace

void write_evaluation_results(const std::filesystem::path& dir, const EvaluationResult& result,
                              MetricsMode mode, double threshold) {
  prepare_dir(dir);
  write_text(dir / "run.json", run_json("evaluate", mode, threshold, result.scored).dump(2) + "\n");
  write_text(dir / "metrics.csv", metrics_csv(result.rows));
  write_text(dir / "predictions.csv", predictions_csv(result.scored));
  write_text(dir / "records.csv", records_csv(result.scored.records));
}

void write_cv_results(const std::filesystem::path& dir, const CvResult& result, MetricsMode mode,
                      int k_folds, double threshold) {
  prepare_dir(dir);
  auto run = run_json("cv", mode, threshold, result.scored);
  run["k_folds"] = k_folds;
  write_text(dir / "run.json", run.dump(2) + "\n");
  write_text(dir / "metrics.csv", metrics_csv(result.mean));
  write_text(dir / "metrics_std.csv", metrics_csv(result.stddev));
  std::string folds = "fold,model";
  for (const auto& name : metric_names()) folds += "," + name;
  folds += "\n";
  for (std::size_t f = 0; f < result.per_fold.size(); ++f) {
    for (const auto& row : result.per_fold[f]) {
      folds += std::to_string(f) + "," + row.model_name;
      for (double v : metric_values(row)) folds += "," + fixed6(v);
      folds += "\n";
    }
  }
  write_text(dir / "fold_metrics.csv", folds);
  write_text(dir / "predictions.csv", predictions_csv(result.scored));
  write_text(dir / "records.csv", records_csv(result.scored.records));
}

// ---- report ----------------------------------------------------------------

namespace {

const std::vector<std::string>& metric_titles() {
  static const std::vector<std::string> titles = {"Accuracy",    "PRC", "Sensitivity",
                                                  "Specificity", "F1 Score", "ROC",
                                                  "Log_Loss",    "MCC"};
  return titles;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name, const std::filesystem::path& source) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw InputError(source.string() + ": missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  }
};

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("missing result file '" + path.string() + "'");
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
  t.header = split_commas(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto cells = split_commas(line);
    if (cells.size() != t.header.size()) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(t.header.size()) + " fields");
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

double number(const std::string& text, const std::filesystem::path& source) {
  if (text == "inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw InputError(source.string() + ": cannot parse '" + text + "'");
}

std::string render(ReportFormat format, const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    if (format == ReportFormat::csv) {
      for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
    } else {
      out += "|";
      for (const auto& c : cells) out += " " + c + " |";
    }
    out += "\n";
  };
  line(header);
  if (format == ReportFormat::md) {
    out += "|";
    for (std::size_t i = 0; i < header.size(); ++i) out += i == 0 ? " --- |" : " ---: |";
    out += "\n";
  }
  for (const auto& r : rows) line(r);
  return out;
}

std::string threshold_text(double t) { return std::isinf(t) ? "inf" : fixed6(t); }

}  // namespace

std::string metrics_table(const std::vector<EvaluationRow>& rows,
                          const std::vector<EvaluationRow>* stddev) {
  std::vector<std::string> header{"Model"};
  header.insert(header.end(), metric_titles().begin(), metric_titles().end());
  std::vector<std::vector<std::string>> body;
  for (std::size_t m = 0; m < rows.size(); ++m) {
    std::vector<std::string> cells{rows[m].model_name};
    const auto v = metric_values(rows[m]);
    for (std::size_t j = 0; j < v.size(); ++j) {
      cells.push_back(stddev ? fixed6(v[j]) + " ± " + fixed6(metric_values((*stddev)[m])[j])
                             : fixed6(v[j]));
    }
    body.push_back(std::move(cells));
  }
  return render(ReportFormat::md, header, body);
}

std::vector<std::filesystem::path> write_report(const std::filesystem::path& results_dir,
                                                const std::filesystem::path& out_dir,
                                                const ReportOptions& options) {
  if (!std::filesystem::is_directory(results_dir)) {
    throw InputError("results directory '" + results_dir.string() + "' does not exist");
  }
  const auto run_path = results_dir / "run.json";
  Json run;
  {
    std::ifstream in(run_path, std::ios::binary);
    if (!in) throw InputError("no results in '" + results_dir.string() + "' (missing run.json)");
    try {
      run = Json::parse(in);
    } catch (const Json::exception& e) {
      throw InputError(run_path.string() + ": " + e.what());
    }
  }
  double threshold = 0.5;
  bool cv = false;
  try {
    threshold = run.at("threshold").get<double>();
    cv = run.at("command").get<std::string>() == "cv";
  } catch (const Json::exception& e) {
    throw InputError(run_path.string() + ": " + e.what());
  }

  const auto metrics_path = results_dir / "metrics.csv";
  const auto metrics = read_table(metrics_path);
  std::optional<Table> spread;
  if (cv) spread = read_table(results_dir / "metrics_std.csv");
  const auto predictions_path = results_dir / "predictions.csv";
  const auto predictions = read_table(predictions_path);
  const auto records_path = results_dir / "records.csv";
  const auto records = read_table(records_path);

  const auto fmt = options.format;
  const std::string ext = fmt == ReportFormat::csv ? ".csv" : ".md";
  prepare_dir(out_dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& stem, const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& rows) {
    const auto path = out_dir / (stem + ext);
    write_text(path, render(fmt, header, rows));
    written.push_back(path);
  };

  // (a) results matrix
  {
    std::vector<std::string> header{"model"};
    if (fmt == ReportFormat::md) {
      header = {"Model"};
      header.insert(header.end(), metric_titles().begin(), metric_titles().end());
    } else {
      for (const auto& name : metric_names()) {
        header.push_back(name);
        if (cv) header.push_back(name + "_std");
      }
    }
    std::vector<std::vector<std::string>> rows;
    for (std::size_t r = 0; r < metrics.rows.size(); ++r) {
      std::vector<std::string> cells{metrics.rows[r][0]};
      for (const auto& name : metric_names()) {
        const auto mean = metrics.rows[r][metrics.column(name, metrics_path)];
        if (!cv) {
          cells.push_back(mean);
          continue;
        }
        const auto sd = spread->rows.at(r)[spread->column(name, results_dir / "metrics_std.csv")];
        if (fmt == ReportFormat::md) {
          cells.push_back(mean + " ± " + sd);
        } else {
          cells.push_back(mean);
          cells.push_back(sd);
        }
      }
      rows.push_back(std::move(cells));
    }
    emit("table", header, rows);
  }

  // (b) accuracy chart data
  {
    std::vector<std::vector<std::string>> rows;
    const auto acc = metrics.column("accuracy", metrics_path);
    for (const auto& r : metrics.rows) rows.push_back({r[0], r[acc]});
    emit("accuracy_chart", {"model", "accuracy"}, rows);
  }

  // Scores per model from the prediction export.
  std::vector<std::string> models;
  for (const auto& r : metrics.rows) models.push_back(r[0]);
  const auto label_col = predictions.column("label", predictions_path);
  const auto n = static_cast<Eigen::Index>(predictions.rows.size());
  if (n == 0) throw InputError(predictions_path.string() + ": no records");
  Eigen::VectorXi labels(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    labels(i) = static_cast<int>(number(predictions.rows[static_cast<std::size_t>(i)][label_col],
                                        predictions_path));
  }
  auto scores_of = [&](const std::string& model) {
    const auto col = predictions.column(model, predictions_path);
    Eigen::VectorXd p(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p(i) = number(predictions.rows[static_cast<std::size_t>(i)][col], predictions_path);
    }
    return p;
  };

  // (c) confusion counts, (d) ROC points
  {
    std::vector<std::vector<std::string>> counts;
    std::vector<std::vector<std::string>> points;
    const bool both = labels.sum() > 0 && labels.sum() < n;
    for (const auto& model : models) {
      const auto p = scores_of(model);
      const auto cm = confusion(labels, hard_predictions(p, threshold));
      counts.push_back({model, std::to_string(cm.tp), std::to_string(cm.fp),
                        std::to_string(cm.tn), std::to_string(cm.fn)});
      if (!both) continue;
      const auto curve = roc_curve(labels, p);
      for (std::size_t i = 0; i < curve.fpr.size(); ++i) {
        points.push_back({model, threshold_text(curve.thresholds[i]), fixed6(curve.fpr[i]),
                          fixed6(curve.tpr[i])});
      }
    }
    emit("confusion", {"model", "tp", "fp", "tn", "fn"}, counts);
    emit("roc_points", {"model", "threshold", "fpr", "tpr"}, points);
  }

  // (e) per-record scatter data for the first model (the stack when present)
  {
    std::string x = options.scatter_x;
    std::string y = options.scatter_y;
    if (x.empty() || y.empty()) {
      const auto schema = heart_schema();
      std::vector<std::string> numeric;
      for (int j : schema.numeric_columns()) {
        const auto& name = schema.columns[static_cast<std::size_t>(j)].name;
        if (std::find(records.header.begin(), records.header.end(), name) != records.header.end()) {
          numeric.push_back(name);
        }
      }
      if (numeric.size() < 2) {
        numeric.assign(records.header.begin() + std::min<std::ptrdiff_t>(1, records.header.size()),
                       records.header.end());
      }
      if (numeric.size() < 2) throw InputError(records_path.string() + ": too few feature columns");
      if (x.empty()) x = numeric[0];
      if (y.empty()) y = numeric[1] == x ? numeric[0] : numeric[1];
    }
    const auto xc = records.column(x, records_path);
    const auto yc = records.column(y, records_path);
    const auto id_col = records.column("row_id", records_path);
    const auto pid_col = predictions.column("row_id", predictions_path);
    if (records.rows.size() != predictions.rows.size()) {
      throw InputError("records.csv and predictions.csv disagree in length");
    }
    const auto p = scores_of(models.front());
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < records.rows.size(); ++i) {
      if (records.rows[i][id_col] != predictions.rows[i][pid_col]) {
        throw InputError("records.csv and predictions.csv disagree at line " +
                         std::to_string(i + 2));
      }
      rows.push_back({records.rows[i][id_col], records.rows[i][xc], records.rows[i][yc],
                      std::to_string(labels(static_cast<Eigen::Index>(i))),
                      p(static_cast<Eigen::Index>(i)) >= threshold ? "1" : "0"});
    }
    emit("scatter", {"row_id", x, y, "label", "predicted"}, rows);
  }
  return written;
}

}  // namespace stackml
