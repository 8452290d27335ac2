#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "stackml/baselines.hpp"
#include "stackml/dataset.hpp"
#include "stackml/learner.hpp"
#include "stackml/metrics.hpp"

namespace stackml {

// safe: outlier statistics come from the training rows only.
// paper: outliers are removed from the full table before the split.
enum class PipelineOrder { safe, paper };

struct ExperimentConfig {
  std::filesystem::path data_path;
  ColumnRemap columns;
  double z_threshold = 3.0;
  double test_fraction = 0.2;
  int k_folds = 5;
  std::uint64_t seed = 42;
  std::vector<LearnerKind> roster;
  // Hyperparameters for every learner kind, indexed by LearnerKind, whether
  // or not it is in the roster.
  std::vector<BaseLearnerSpec> learners;
  LinearParams meta;
  MetricsMode metrics_mode = MetricsMode::standard;
  PipelineOrder order = PipelineOrder::safe;
};

// z 3.0, 80/20 split, 5 folds, seed 42, all nine learners, standard metrics,
// safe order.
ExperimentConfig default_config();

// Grammar, one entry per line:
//   key = value      keys are dotted names, e.g. `cv.k_folds` or `rf.n_trees`
//   # comment        blank lines and comment lines are ignored
// Unknown or repeated keys are errors. Values are validated at the end.
ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");

// Relative data.path values are resolved against the config file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);

// Throws InputError describing the first invalid setting.
void validate_config(const ExperimentConfig& config);

void set_seed(ExperimentConfig& config, std::uint64_t seed);

// Specs for the roster members, in roster order.
std::vector<BaseLearnerSpec> roster_specs(const ExperimentConfig& config);

// Canonical `key = value` text; parse_config(render_config(c)) == c.
std::string render_config(const ExperimentConfig& config);

// FNV-1a of the canonical text without data.path, so that moving the data
// file does not change model fingerprints.
std::uint64_t config_hash(const ExperimentConfig& config);

// Documented key names, in canonical order.
std::vector<std::string> config_keys();

}  // namespace stackml
