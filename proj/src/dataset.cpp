#include "stackml/dataset.hpp"

#include "stackml/error.hpp"
#include "stackml/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace stackml {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string normalize_name(std::string_view s) {
  std::string out = trim(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(trim(std::string_view(line).substr(start)));
      return fields;
    }
    fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
    start = comma + 1;
  }
}

std::optional<double> parse_real(const std::string& cell) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) {
    if (!out.empty()) out += ", ";
    out += "'" + n + "'";
  }
  return out;
}

void check_allowed(const ColumnSpec& col, double value, std::size_t line) {
  const auto fail = [&] {
    throw InputError("line " + std::to_string(line) + ": value " + format_real(value) +
                     " out of range for column '" + col.name + "'");
  };
  if (col.range && (value < col.range->first || value > col.range->second)) fail();
  if (!col.categories.empty() &&
      std::find(col.categories.begin(), col.categories.end(), value) == col.categories.end()) {
    fail();
  }
}

}  // namespace

std::vector<int> FeatureSchema::numeric_columns() const {
  std::vector<int> out;
  for (int j = 0; j < feature_count(); ++j) {
    if (columns[static_cast<std::size_t>(j)].kind == ColumnKind::numeric) out.push_back(j);
  }
  return out;
}

FeatureSchema heart_schema() {
  const auto numeric = [](std::string name) {
    return ColumnSpec{std::move(name), ColumnKind::numeric, std::nullopt, {}};
  };
  const auto nominal = [](std::string name, std::vector<double> codes) {
    return ColumnSpec{std::move(name), ColumnKind::nominal, std::nullopt, std::move(codes)};
  };
  FeatureSchema schema;
  schema.columns = {
      numeric("age"),
      nominal("sex", {0, 1}),
      nominal("chest pain type", {1, 2, 3, 4}),
      numeric("resting bp s"),
      numeric("cholesterol"),
      nominal("fasting blood sugar", {0, 1}),
      nominal("resting ecg", {0, 1, 2}),
      numeric("max heart rate"),
      nominal("exercise angina", {0, 1}),
      numeric("oldpeak"),
      nominal("ST slope", {0, 1, 2, 3}),
  };
  schema.target_name = "target";
  schema.positive_label = 1;
  return schema;
}

LabeledDataset LabeledDataset::subset(const std::vector<int>& positions) const {
  LabeledDataset out;
  out.schema = schema;
  out.features.resize(static_cast<Eigen::Index>(positions.size()), features.cols());
  out.labels.resize(static_cast<Eigen::Index>(positions.size()));
  out.row_ids.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.features.row(r) = features.row(positions[i]);
    out.labels(r) = labels(positions[i]);
    out.row_ids.push_back(row_ids[static_cast<std::size_t>(positions[i])]);
  }
  return out;
}

std::array<int, 2> LabeledDataset::class_counts() const {
  std::array<int, 2> counts{0, 0};
  for (Eigen::Index i = 0; i < labels.size(); ++i) ++counts[labels(i) == 1 ? 1 : 0];
  return counts;
}

LabeledDataset load_csv(const std::filesystem::path& path, const FeatureSchema& schema,
                        const ColumnRemap& remap, LoadStats* stats, TargetColumn target) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": missing header line");
  const auto header = split_fields(line);

  // Expected header name -> schema slot (0..D-1 features, D target).
  const int d = schema.feature_count();
  std::vector<std::string> display;
  for (const auto& col : schema.columns) {
    const auto it = remap.find(col.name);
    display.push_back(it == remap.end() ? col.name : it->second);
  }
  {
    const auto it = remap.find(schema.target_name);
    display.push_back(it == remap.end() ? schema.target_name : it->second);
  }
  std::vector<std::string> expected;
  for (const auto& name : display) expected.push_back(normalize_name(name));

  std::vector<int> slot_of_field(header.size(), -1);
  std::vector<bool> seen(expected.size(), false);
  std::vector<std::string> extra;
  for (std::size_t f = 0; f < header.size(); ++f) {
    const auto name = normalize_name(header[f]);
    const auto it = std::find(expected.begin(), expected.end(), name);
    if (it == expected.end() || seen[static_cast<std::size_t>(it - expected.begin())]) {
      extra.push_back(header[f]);
      continue;
    }
    const auto slot = static_cast<std::size_t>(it - expected.begin());
    seen[slot] = true;
    slot_of_field[f] = static_cast<int>(slot);
  }
  std::vector<std::string> missing;
  for (std::size_t s = 0; s < expected.size(); ++s) {
    if (!seen[s] && !(s == static_cast<std::size_t>(d) && target == TargetColumn::optional)) {
      missing.push_back(display[s]);
    }
  }
  const bool has_target = seen[static_cast<std::size_t>(d)];
  if (!missing.empty() || !extra.empty()) {
    std::string msg = path.string() + ": header does not match schema";
    if (!missing.empty()) msg += "; missing columns: " + join(missing);
    if (!extra.empty()) msg += "; unexpected columns: " + join(extra);
    throw InputError(msg);
  }

  std::vector<double> values;
  std::vector<int> labels;
  std::vector<std::size_t> row_ids;
  LoadStats local;
  std::size_t line_no = 1;
  std::size_t data_row = 0;
  std::vector<double> row(static_cast<std::size_t>(d));
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::size_t this_row = data_row++;
    ++local.rows_read;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw InputError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(fields.size()));
    }
    if (std::any_of(fields.begin(), fields.end(), [](const auto& c) { return c.empty(); })) {
      ++local.rows_dropped_missing;
      continue;
    }
    int label = 0;
    for (std::size_t f = 0; f < fields.size(); ++f) {
      const auto value = parse_real(fields[f]);
      if (!value) {
        throw InputError("line " + std::to_string(line_no) + ": cannot parse '" + fields[f] +
                         "' in column '" + header[f] + "'");
      }
      const int slot = slot_of_field[f];
      if (slot == d) {
        if (*value != 0.0 && *value != 1.0) {
          throw InputError("line " + std::to_string(line_no) + ": target must be 0 or 1, got '" +
                           fields[f] + "'");
        }
        label = static_cast<int>(*value);
      } else {
        check_allowed(schema.columns[static_cast<std::size_t>(slot)], *value, line_no);
        row[static_cast<std::size_t>(slot)] = *value;
      }
    }
    values.insert(values.end(), row.begin(), row.end());
    labels.push_back(label);
    row_ids.push_back(this_row);
  }
  if (stats) *stats = local;
  if (labels.empty()) throw InputError(path.string() + ": empty data section");

  LabeledDataset out;
  out.schema = schema;
  const auto n = static_cast<Eigen::Index>(labels.size());
  out.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                Eigen::RowMajor>>(values.data(), n, d);
  if (has_target) out.labels = Eigen::Map<const Eigen::VectorXi>(labels.data(), n);
  out.row_ids = std::move(row_ids);
  return out;
}

std::string format_real(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_csv(const std::filesystem::path& path, const LabeledDataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  for (const auto& col : data.schema.columns) out << col.name << ',';
  out << data.schema.target_name << '\n';
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) out << format_real(data.features(i, j)) << ',';
    out << data.labels(i) << '\n';
  }
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

ColumnStats compute_column_stats(const LabeledDataset& data) {
  ColumnStats stats;
  stats.columns = data.schema.numeric_columns();
  const auto n = static_cast<double>(data.rows());
  for (const int j : stats.columns) {
    const auto col = data.features.col(j);
    const double mean = n > 0 ? col.mean() : 0.0;
    const double var = n > 0 ? (col.array() - mean).square().sum() / n : 0.0;
    stats.mean.push_back(mean);
    stats.stddev.push_back(std::sqrt(var));
  }
  return stats;
}

OutlierFilterResult filter_outliers_zscore(const LabeledDataset& data, double threshold,
                                           const ColumnStats& stats) {
  if (!(threshold > 0.0)) throw std::invalid_argument("z threshold must be positive");
  std::vector<int> kept;
  OutlierFilterResult result;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    bool outlier = false;
    for (std::size_t c = 0; c < stats.columns.size() && !outlier; ++c) {
      if (stats.stddev[c] == 0.0) continue;
      const double z = (data.features(i, stats.columns[c]) - stats.mean[c]) / stats.stddev[c];
      outlier = std::abs(z) > threshold;
    }
    (outlier ? result.removed : kept).push_back(static_cast<int>(i));
  }
  result.kept = data.subset(kept);
  return result;
}

OutlierFilterResult filter_outliers_zscore(const LabeledDataset& data, double threshold) {
  return filter_outliers_zscore(data, threshold, compute_column_stats(data));
}

Standardizer::Standardizer(FeatureSchema schema, ColumnStats stats)
    : schema_(std::move(schema)), stats_(std::move(stats)), fitted_(true) {}

Standardizer Standardizer::fit(const LabeledDataset& data) {
  return Standardizer(data.schema, compute_column_stats(data));
}

void Standardizer::check_width(Eigen::Index cols) const {
  if (!fitted_) throw std::logic_error("standardizer used before fit");
  if (cols != schema_.feature_count()) {
    throw InputError("standardizer fitted on " + std::to_string(schema_.feature_count()) +
                     " columns, data has " + std::to_string(cols));
  }
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& features) const {
  check_width(features.cols());
  Eigen::MatrixXd out = features;
  for (std::size_t c = 0; c < stats_.columns.size(); ++c) {
    auto col = out.col(stats_.columns[c]).array();
    col -= stats_.mean[c];
    if (stats_.stddev[c] > 0.0) col /= stats_.stddev[c];
  }
  return out;
}

Eigen::MatrixXd Standardizer::inverse_transform(const Eigen::MatrixXd& features) const {
  check_width(features.cols());
  Eigen::MatrixXd out = features;
  for (std::size_t c = 0; c < stats_.columns.size(); ++c) {
    auto col = out.col(stats_.columns[c]).array();
    if (stats_.stddev[c] > 0.0) col *= stats_.stddev[c];
    col += stats_.mean[c];
  }
  return out;
}

LabeledDataset Standardizer::transform(const LabeledDataset& data) const {
  if (data.schema != schema_) throw InputError("standardizer schema does not match data schema");
  LabeledDataset out = data;
  out.features = transform(data.features);
  return out;
}

namespace {

std::array<std::vector<int>, 2> positions_by_class(const Eigen::VectorXi& labels) {
  std::array<std::vector<int>, 2> by_class;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    by_class[labels(i) == 1 ? 1 : 0].push_back(static_cast<int>(i));
  }
  return by_class;
}

}  // namespace

SplitIndices train_test_split_stratified(const Eigen::VectorXi& labels, double test_fraction,
                                         std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("test fraction must lie in (0, 1)");
  }
  auto by_class = positions_by_class(labels);
  SplitIndices split;
  for (int c = 0; c < 2; ++c) {
    auto& members = by_class[static_cast<std::size_t>(c)];
    if (members.size() < 2) {
      throw DataShapeError("class " + std::to_string(c) + " has " +
                           std::to_string(members.size()) + " rows; stratified split needs >= 2");
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    rng.shuffle(members);
    // nearbyint under the default rounding mode rounds half to even.
    const auto n_test = static_cast<std::size_t>(
        std::nearbyint(static_cast<double>(members.size()) * test_fraction));
    split.test.insert(split.test.end(), members.begin(),
                      members.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.insert(split.train.end(),
                       members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::vector<int> FoldPlan::complement(int f) const {
  std::vector<int> out;
  for (int g = 0; g < k; ++g) {
    if (g == f) continue;
    const auto& fold = folds[static_cast<std::size_t>(g)];
    out.insert(out.end(), fold.begin(), fold.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> FoldPlan::assignment(std::size_t n) const {
  std::vector<int> fold_of(n, -1);
  for (int f = 0; f < k; ++f) {
    for (const int i : folds[static_cast<std::size_t>(f)]) fold_of[static_cast<std::size_t>(i)] = f;
  }
  return fold_of;
}

FoldPlan stratified_kfold(const Eigen::VectorXi& labels, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("k-fold needs k >= 2");
  auto by_class = positions_by_class(labels);
  for (int c = 0; c < 2; ++c) {
    const auto count = by_class[static_cast<std::size_t>(c)].size();
    if (count < static_cast<std::size_t>(k)) {
      throw DataShapeError("k = " + std::to_string(k) + " exceeds the " + std::to_string(count) +
                           " rows of class " + std::to_string(c));
    }
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.folds.resize(static_cast<std::size_t>(k));
  std::size_t position = 0;
  for (int c = 0; c < 2; ++c) {
    auto& members = by_class[static_cast<std::size_t>(c)];
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    rng.shuffle(members);
    for (const int i : members) plan.folds[position++ % static_cast<std::size_t>(k)].push_back(i);
  }
  for (auto& fold : plan.folds) std::sort(fold.begin(), fold.end());
  return plan;
}

}  // namespace stackml
