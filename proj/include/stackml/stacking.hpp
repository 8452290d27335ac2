#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "stackml/baselines.hpp"
#include "stackml/dataset.hpp"
#include "stackml/learner.hpp"
#include "stackml/parallel.hpp"

namespace stackml {

// Level-0 learners refit on the full training set, plus a logistic level-1
// learner trained on their out-of-fold P(1) predictions.
struct StackedModel {
  std::vector<BaseLearnerSpec> base_specs;
  std::vector<LearnerModel> base_models;
  LinearModel meta;
  FoldPlan fold_plan;
  std::vector<std::string> layout;  // meta-feature column names, roster order

  bool operator==(const StackedModel&) const;
};

// Defaults of the level-1 learner.
inline LinearParams default_meta_params() { return LinearParams{500, 0.1, 1e-4}; }

// N x B matrix whose entry (i, j) is P(1) for row i from learner j fitted on
// the rows outside row i's fold, with seed derive_seed(spec.seed, fold + 1).
// The B x k fits may run concurrently; results are placed by position.
Eigen::MatrixXd generate_oof_meta_features(const Eigen::MatrixXd& features,
                                           const Eigen::VectorXi& labels,
                                           const std::vector<BaseLearnerSpec>& specs,
                                           const FoldPlan& fold_plan,
                                           Parallelism parallelism = {});

StackedModel fit_stacked_ensemble(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                                  const std::vector<BaseLearnerSpec>& specs, int k,
                                  std::uint64_t seed,
                                  const LinearParams& meta_params = default_meta_params(),
                                  Parallelism parallelism = {});

// P(1) of every refit base learner, one column per learner in layout order.
Eigen::MatrixXd base_predictions(const StackedModel& model, const Eigen::MatrixXd& rows);

ProbabilityPairs predict_proba(const StackedModel& model, const Eigen::MatrixXd& rows);

}  // namespace stackml
