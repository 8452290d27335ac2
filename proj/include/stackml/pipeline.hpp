#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "stackml/config.hpp"
#include "stackml/dataset.hpp"
#include "stackml/metrics.hpp"
#include "stackml/parallel.hpp"
#include "stackml/serialization.hpp"

namespace stackml {

inline constexpr const char* kStackedName = "Stacked";

LabeledDataset load_experiment_data(const ExperimentConfig& config, LoadStats* stats = nullptr);

struct PrepOutcome {
  LabeledDataset kept;
  ColumnStats stats;  // of the input, used for the z-scores
  std::vector<std::size_t> removed_row_ids;
};

PrepOutcome prepare(const LabeledDataset& raw, double z_threshold);

// JSON sidecar: rows read, rows dropped for missing cells, rows removed with
// their row ids, and the per-column statistics.
std::string prep_summary(const PrepOutcome& prep, const LoadStats& load, double z_threshold);

struct TrainOutcome {
  ModelFile model;
  LabeledDataset train;  // raw rows the model was fitted on
  LabeledDataset test;   // raw held-out rows
  std::vector<std::size_t> removed_row_ids;
};

// Split, outlier filter (order per config.order), standardize on the training
// rows, fit the stacked ensemble.
TrainOutcome train_experiment(const ExperimentConfig& config, const LabeledDataset& raw,
                              Parallelism parallelism = {});

struct ModelScores {
  std::string name;
  Eigen::VectorXd positive;  // P(1) per record
};

// Scores on a set of records: one entry per model, the stack first when the
// model file holds one, followed by its refit base learners.
struct ScoredRecords {
  LabeledDataset records;  // raw rows
  std::vector<int> fold;   // outer fold per record, empty for a single split
  std::vector<ModelScores> scores;
};

struct EvaluationResult {
  ScoredRecords scored;
  std::vector<EvaluationRow> rows;
};

EvaluationResult evaluate_model(const ModelFile& model, const LabeledDataset& records,
                                MetricsMode mode, double threshold = 0.5);

struct CvResult {
  ScoredRecords scored;
  std::vector<std::vector<EvaluationRow>> per_fold;  // [fold][model]
  std::vector<EvaluationRow> mean;
  std::vector<EvaluationRow> stddev;  // sample standard deviation over folds
};

// Outer stratified k-fold over the records. Inside each fold the training
// part goes through the same steps as train_experiment (with an inner fold
// plan for the stack) and every model is scored on the held-out part.
CvResult cross_validate(const ExperimentConfig& config, const LabeledDataset& raw,
                        Parallelism parallelism = {});

// ---- result directories --------------------------------------------------
//
//   run.json          command, metrics mode, threshold, model names
//   metrics.csv       one row per model, 6-decimal fixed
//   metrics_std.csv   cv only: fold standard deviations
//   fold_metrics.csv  cv only: one row per (fold, model)
//   predictions.csv   row_id, label, [fold,] P(1) per model
//   records.csv       row_id and the raw feature values

void write_evaluation_results(const std::filesystem::path& dir, const EvaluationResult& result,
                              MetricsMode mode, double threshold = 0.5);
void write_cv_results(const std::filesystem::path& dir, const CvResult& result, MetricsMode mode,
                      int k_folds, double threshold = 0.5);

enum class ReportFormat { csv, md };

struct ReportOptions {
  ReportFormat format = ReportFormat::md;
  std::string scatter_x;  // feature names; empty picks the first two numeric columns
  std::string scatter_y;
};

// Reads a result directory and writes the figure and table data files into
// out_dir. Returns the paths written. Throws InputError if results are
// missing or malformed.
std::vector<std::filesystem::path> write_report(const std::filesystem::path& results_dir,
                                                const std::filesystem::path& out_dir,
                                                const ReportOptions& options);

std::string fixed6(double value);

// Markdown table of metric rows, as printed by evaluate and cv.
std::string metrics_table(const std::vector<EvaluationRow>& rows,
                          const std::vector<EvaluationRow>* stddev = nullptr);

}  // namespace stackml
