#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stackml {

enum class ColumnKind { numeric, nominal };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  // Closed interval for numeric columns, permitted codes for nominal ones.
  // Either may be absent, in which case the column is unconstrained.
  std::optional<std::pair<double, double>> range;
  std::vector<double> categories;

  bool operator==(const ColumnSpec&) const = default;
};

struct FeatureSchema {
  std::vector<ColumnSpec> columns;
  std::string target_name = "target";
  int positive_label = 1;

  int feature_count() const { return static_cast<int>(columns.size()); }
  std::vector<int> numeric_columns() const;
  bool operator==(const FeatureSchema&) const = default;
};

// Eleven features and the binary target of the combined Statlog / Cleveland /
// Hungary heart-disease table, in the file's column order.
FeatureSchema heart_schema();

struct LabeledDataset {
  Eigen::MatrixXd features;  // N x D
  Eigen::VectorXi labels;    // N, values in {0, 1}
  FeatureSchema schema;
  std::vector<std::size_t> row_ids;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index cols() const { return features.cols(); }
  bool empty() const { return features.rows() == 0; }

  // Rows at the given positions, in the given order.
  LabeledDataset subset(const std::vector<int>& positions) const;

  std::array<int, 2> class_counts() const;
};

// Maps schema column names onto the header names used in a particular file.
using ColumnRemap = std::map<std::string, std::string>;

struct LoadStats {
  std::size_t rows_read = 0;
  std::size_t rows_dropped_missing = 0;
};

enum class TargetColumn { required, optional };

// Reads a comma-separated file with a header row. Header names are matched to
// the schema case-insensitively after trimming (and after `remap`). Rows with
// an empty cell are dropped and counted; any other bad cell is an InputError
// naming the line. With TargetColumn::optional a file without the target
// column loads with empty labels.
LabeledDataset load_csv(const std::filesystem::path& path, const FeatureSchema& schema,
                        const ColumnRemap& remap = {}, LoadStats* stats = nullptr,
                        TargetColumn target = TargetColumn::required);

// Writes the dataset with schema column names. Reals use the shortest
// representation that parses back to the same double.
void write_csv(const std::filesystem::path& path, const LabeledDataset& data);

std::string format_real(double value);

// Per-numeric-column location and scale, population convention (divide by N).
struct ColumnStats {
  std::vector<int> columns;
  std::vector<double> mean;
  std::vector<double> stddev;
};

ColumnStats compute_column_stats(const LabeledDataset& data);

struct OutlierFilterResult {
  LabeledDataset kept;
  std::vector<int> removed;  // positions in the input
};

// Removes every row with |z| > threshold on any numeric column. z uses the
// given statistics; a zero stddev column yields z = 0.
OutlierFilterResult filter_outliers_zscore(const LabeledDataset& data, double threshold,
                                           const ColumnStats& stats);
OutlierFilterResult filter_outliers_zscore(const LabeledDataset& data, double threshold);

class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(FeatureSchema schema, ColumnStats stats);

  static Standardizer fit(const LabeledDataset& data);

  bool fitted() const { return fitted_; }
  const ColumnStats& stats() const { return stats_; }
  const FeatureSchema& schema() const { return schema_; }

  LabeledDataset transform(const LabeledDataset& data) const;
  Eigen::MatrixXd transform(const Eigen::MatrixXd& features) const;
  Eigen::MatrixXd inverse_transform(const Eigen::MatrixXd& features) const;

 private:
  void check_width(Eigen::Index cols) const;

  FeatureSchema schema_;
  ColumnStats stats_;
  bool fitted_ = false;
};

struct SplitIndices {
  std::vector<int> train;
  std::vector<int> test;
};

// Per-class shuffle, then round-half-to-even(class_count * test_fraction)
// rows of each class go to test. Both lists come back sorted.
SplitIndices train_test_split_stratified(const Eigen::VectorXi& labels, double test_fraction,
                                         std::uint64_t seed);
inline SplitIndices train_test_split_stratified(const LabeledDataset& data,
                                                double test_fraction, std::uint64_t seed) {
  return train_test_split_stratified(data.labels, test_fraction, seed);
}

struct FoldPlan {
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<int>> folds;  // each sorted ascending

  // Positions outside fold f, sorted.
  std::vector<int> complement(int f) const;
  // fold index of every position.
  std::vector<int> assignment(std::size_t n) const;
};

// Each class is shuffled, the classes are concatenated, and position p of that
// sequence goes to fold p mod k. Requires k <= smallest class count.
FoldPlan stratified_kfold(const Eigen::VectorXi& labels, int k, std::uint64_t seed);
inline FoldPlan stratified_kfold(const LabeledDataset& data, int k, std::uint64_t seed) {
  return stratified_kfold(data.labels, k, seed);
}

}  // namespace stackml
