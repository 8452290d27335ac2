#include "stackml/stacking.hpp"

#include <set>
#include <stdexcept>

#include "stackml/error.hpp"

namespace stackml {

bool StackedModel::operator==(const StackedModel& other) const {
  return base_specs == other.base_specs && base_models == other.base_models &&
         meta == other.meta && fold_plan.k == other.fold_plan.k &&
         fold_plan.seed == other.fold_plan.seed && fold_plan.folds == other.fold_plan.folds &&
         layout == other.layout;
}

namespace {

void check_specs(const std::vector<BaseLearnerSpec>& specs) {
  if (specs.empty()) throw std::invalid_argument("stacking needs at least one base learner");
  std::set<LearnerKind> seen;
  for (const auto& spec : specs) {
    validate_spec(spec);
    if (!seen.insert(spec.kind).second) {
      throw std::invalid_argument("duplicate base learner " + spec.name());
    }
  }
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& x, const std::vector<int>& positions) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(positions.size()), x.cols());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = x.row(positions[i]);
  }
  return out;
}

Eigen::VectorXi labels_of(const Eigen::VectorXi& y, const std::vector<int>& positions) {
  Eigen::VectorXi out(static_cast<Eigen::Index>(positions.size()));
  for (std::size_t i = 0; i < positions.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = y(positions[i]);
  }
  return out;
}

}  // namespace

Eigen::MatrixXd generate_oof_meta_features(const Eigen::MatrixXd& features,
                                           const Eigen::VectorXi& labels,
                                           const std::vector<BaseLearnerSpec>& specs,
                                           const FoldPlan& fold_plan, Parallelism parallelism) {
  check_specs(specs);
  const auto n = static_cast<std::size_t>(features.rows());
  const auto assignment = fold_plan.assignment(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (assignment[i] < 0) throw std::invalid_argument("fold plan does not cover every row");
  }

  const auto k = static_cast<std::size_t>(fold_plan.k);
  std::vector<Eigen::MatrixXd> fold_x(k);
  std::vector<Eigen::VectorXi> fold_y(k);
  std::vector<Eigen::MatrixXd> held_x(k);
  for (std::size_t f = 0; f < k; ++f) {
    const auto train = fold_plan.complement(static_cast<int>(f));
    fold_x[f] = rows_of(features, train);
    fold_y[f] = labels_of(labels, train);
    const auto positives = (fold_y[f].array() == 1).count();
    if (positives == 0 || positives == fold_y[f].size()) {
      throw DataShapeError("fold " + std::to_string(f) +
                           ": training complement contains a single class");
    }
    held_x[f] = rows_of(features, fold_plan.folds[f]);
  }

  Eigen::MatrixXd meta(features.rows(), static_cast<Eigen::Index>(specs.size()));
  parallel_for(specs.size() * k, parallelism, [&](std::size_t task) {
    const std::size_t j = task / k;
    const std::size_t f = task % k;
    const auto& spec = specs[j];
    const LearnerModel model =
        fit_learner(spec, fold_x[f], fold_y[f], derive_seed(spec.seed, f + 1));
    const ProbabilityPairs p = predict_proba(model, held_x[f]);
    const auto& fold = fold_plan.folds[f];
    for (std::size_t i = 0; i < fold.size(); ++i) {
      meta(fold[i], static_cast<Eigen::Index>(j)) = p(static_cast<Eigen::Index>(i), 1);
    }
  });
  return meta;
}

StackedModel fit_stacked_ensemble(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                                  const std::vector<BaseLearnerSpec>& specs, int k,
                                  std::uint64_t seed, const LinearParams& meta_params,
                                  Parallelism parallelism) {
  require_both_classes(labels, "stacked ensemble");
  if (k < 2) throw std::invalid_argument("stacking needs k >= 2");
  check_specs(specs);

  StackedModel model;
  model.base_specs = specs;
  model.fold_plan = stratified_kfold(labels, k, seed);
  for (const auto& spec : specs) model.layout.push_back(spec.name());

  const Eigen::MatrixXd meta_features =
      generate_oof_meta_features(features, labels, specs, model.fold_plan, parallelism);
  model.meta = fit_logistic_regression(meta_features, labels, meta_params, seed);

  model.base_models.resize(specs.size());
  parallel_for(specs.size(), parallelism, [&](std::size_t j) {
    model.base_models[j] = fit_learner(specs[j], features, labels, specs[j].seed);
  });
  return model;
}

Eigen::MatrixXd base_predictions(const StackedModel& model, const Eigen::MatrixXd& rows) {
  if (model.base_models.size() != model.layout.size() ||
      model.meta.weights.size() != static_cast<Eigen::Index>(model.layout.size())) {
    throw std::logic_error("stacked model is not fitted");
  }
  Eigen::MatrixXd out(rows.rows(), static_cast<Eigen::Index>(model.base_models.size()));
  for (std::size_t j = 0; j < model.base_models.size(); ++j) {
    out.col(static_cast<Eigen::Index>(j)) = predict_proba(model.base_models[j], rows).col(1);
  }
  return out;
}

ProbabilityPairs predict_proba(const StackedModel& model, const Eigen::MatrixXd& rows) {
  return predict_proba(model.meta, base_predictions(model, rows));
}

}  // namespace stackml
