#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

#include "stackml/dataset.hpp"
#include "stackml/random.hpp"

namespace stackml::testing {

// Schema of `numeric` unconstrained numeric columns named x0, x1, ...
inline FeatureSchema numeric_schema(int numeric) {
  FeatureSchema s;
  for (int j = 0; j < numeric; ++j) {
    s.columns.push_back({"x" + std::to_string(j), ColumnKind::numeric, std::nullopt, {}});
  }
  return s;
}

inline LabeledDataset make_dataset(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                                   FeatureSchema schema) {
  LabeledDataset d;
  d.features = x;
  d.labels = y;
  d.schema = std::move(schema);
  for (Eigen::Index i = 0; i < x.rows(); ++i) d.row_ids.push_back(static_cast<std::size_t>(i));
  return d;
}

inline LabeledDataset make_dataset(const Eigen::MatrixXd& x, const Eigen::VectorXi& y) {
  return make_dataset(x, y, numeric_schema(static_cast<int>(x.cols())));
}

// 20 points in the plane, label 1 iff x + y > 0, well away from the line.
inline LabeledDataset separable_fixture() {
  Eigen::MatrixXd x(20, 2);
  Eigen::VectorXi y(20);
  Rng rng(2024);
  for (int i = 0; i < 20; ++i) {
    const int label = i % 2;
    const double a = rng.uniform() * 2.0 - 1.0;
    const double offset = 1.0 + rng.uniform();
    const double s = label == 1 ? 1.0 : -1.0;
    x(i, 0) = s * offset + a;
    x(i, 1) = s * offset - a;
    y(i) = label;
  }
  return make_dataset(x, y);
}

inline LabeledDataset xor_fixture() {
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 0, 1, 1, 0, 1, 1;
  Eigen::VectorXi y(4);
  y << 0, 1, 1, 0;
  return make_dataset(x, y);
}

// Random binary dataset with both classes present.
inline LabeledDataset random_fixture(Rng& rng, int n, int d, int distinct_values = 0) {
  Eigen::MatrixXd x(n, d);
  Eigen::VectorXi y(n);
  for (;;) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) {
        x(i, j) = distinct_values > 0
                      ? static_cast<double>(rng.below(static_cast<std::uint64_t>(distinct_values)))
                      : rng.uniform() * 10.0 - 5.0;
      }
      y(i) = static_cast<int>(rng.below(2));
    }
    const auto pos = (y.array() == 1).count();
    if (pos > 0 && pos < n) break;
  }
  return make_dataset(x, y);
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("stackml_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace stackml::testing
