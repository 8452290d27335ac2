#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "stackml/dataset.hpp"
#include "stackml/learner.hpp"
#include "stackml/stacking.hpp"

namespace stackml {

inline constexpr int kModelFormatVersion = 1;
inline constexpr std::string_view kModelFormatName = "stackml-model";

using TrainedModel = std::variant<StackedModel, LearnerModel>;

ProbabilityPairs predict_proba(const TrainedModel& model, const Eigen::MatrixXd& rows);

struct ModelFingerprint {
  std::uint64_t config_hash = 0;
  std::uint64_t rows = 0;  // training rows after filtering
  std::uint64_t seed = 0;
  bool operator==(const ModelFingerprint&) const = default;
};

// Everything needed to score raw feature rows: the standardizer fitted on the
// training rows (it carries the schema) and the model itself.
struct ModelFile {
  int version = kModelFormatVersion;
  ModelFingerprint fingerprint;
  Standardizer standardizer;
  TrainedModel model;
};

// JSON text. Reals are written in shortest round-trip form, so loading
// reproduces every parameter bit for bit.
std::string serialize_model_file(const ModelFile& file);

// Throws ModelFileError on malformed or truncated text, on a format or
// version mismatch (naming both versions) and on inconsistent contents.
ModelFile parse_model_file(std::string_view text);

void save_model(const ModelFile& file, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace stackml
