#include "stackml/ensemble.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "stackml/error.hpp"

namespace stackml {

ProbabilityPairs to_pairs(const Eigen::VectorXd& positive) {
  ProbabilityPairs out(positive.size(), 2);
  out.col(1) = positive;
  out.col(0) = (1.0 - positive.array()).matrix();
  return out;
}

void require_both_classes(const Eigen::VectorXi& labels, const char* who) {
  const auto positives = (labels.array() == 1).count();
  if (positives == 0 || positives == labels.size()) {
    throw DataShapeError(std::string(who) + ": training data must contain both classes");
  }
}

double prior_log_odds(const Eigen::VectorXi& labels) {
  const auto pos = static_cast<double>((labels.array() == 1).count());
  const auto neg = static_cast<double>(labels.size()) - pos;
  return std::log(pos / neg);
}

namespace {

ForestModel fit_forest(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                       const ForestParams& params, std::uint64_t seed, ForestKind kind,
                       Parallelism parallelism) {
  require_both_classes(y, kind == ForestKind::random_forest ? "random forest" : "extra trees");
  if (params.n_trees < 1) throw std::invalid_argument("forest needs at least one tree");
  ForestModel model;
  model.kind = kind;
  model.params = params;
  model.seed = seed;
  if (kind == ForestKind::extra_trees) model.params.bootstrap = false;
  model.trees.resize(static_cast<std::size_t>(params.n_trees));

  const Eigen::Index n = x.rows();
  parallel_for(model.trees.size(), parallelism, [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    Eigen::VectorXd weights = Eigen::VectorXd::Ones(n);
    if (model.params.bootstrap) {
      weights.setZero();
      for (Eigen::Index i = 0; i < n; ++i) {
        weights(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)))) += 1.0;
      }
    }
    TreeConfig config = params.tree;
    config.max_features = params.max_features;
    config.threshold_mode =
        kind == ForestKind::extra_trees ? ThresholdMode::random : ThresholdMode::best;
    config.seed = rng.next();
    model.trees[t] = fit_tree(x, ClassTargets{y, 2}, weights, config);
  });
  return model;
}

}  // namespace

ForestModel fit_random_forest(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                              const ForestParams& params, std::uint64_t seed,
                              Parallelism parallelism) {
  return fit_forest(features, labels, params, seed, ForestKind::random_forest, parallelism);
}

ForestModel fit_extra_trees(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                            const ForestParams& params, std::uint64_t seed,
                            Parallelism parallelism) {
  return fit_forest(features, labels, params, seed, ForestKind::extra_trees, parallelism);
}

ProbabilityPairs predict_proba(const ForestModel& model, const Eigen::MatrixXd& rows) {
  if (model.trees.empty()) throw std::logic_error("forest model is not fitted");
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(rows.rows());
  for (const auto& tree : model.trees) sum += tree_predict_positive(tree, rows);
  return to_pairs(sum / static_cast<double>(model.trees.size()));
}

int stump_vote(const DecisionTree& stump, RowRef row) {
  const Eigen::ArrayXd p = tree_predict_distribution(stump, row);
  return p(1) >= 0.5 ? 1 : -1;
}

AdaBoostModel fit_adaboost(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                           const AdaBoostParams& params, std::uint64_t seed,
                           std::vector<AdaBoostStage>* trace) {
  require_both_classes(labels, "adaboost");
  AdaBoostModel model;
  model.params = params;
  const Eigen::Index n = features.rows();
  const Eigen::ArrayXd sign = (2 * labels.array() - 1).cast<double>();
  Eigen::VectorXd weights = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));

  for (int t = 0; t < params.n_stages; ++t) {
    TreeConfig config = params.base;
    config.seed = derive_seed(seed, static_cast<std::uint64_t>(t));
    DecisionTree stump = fit_tree(features, ClassTargets{labels, 2}, weights, config);

    Eigen::ArrayXd vote(n);
    for (Eigen::Index i = 0; i < n; ++i) vote(i) = stump_vote(stump, features.row(i));
    const Eigen::Array<bool, Eigen::Dynamic, 1> wrong = vote != sign;
    const double error = wrong.select(weights.array(), 0.0).sum();

    AdaBoostStage stage;
    stage.error = error;
    stage.weights_before = weights;
    stage.misclassified.assign(wrong.data(), wrong.data() + n);

    if (error >= 0.5) {
      if (trace) trace->push_back(std::move(stage));
      break;
    }
    const bool perfect = error < kAdaBoostMinError;
    const double e = perfect ? kAdaBoostMinError : error;
    const double alpha = 0.5 * std::log((1.0 - e) / e);
    model.stumps.push_back(std::move(stump));
    model.alphas.push_back(alpha);
    stage.alpha = alpha;
    stage.accepted = true;
    if (perfect) {
      if (trace) trace->push_back(std::move(stage));
      break;
    }
    weights = (weights.array() * (-alpha * sign * vote).exp()).matrix();
    stage.weights_unnormalized = weights;
    weights /= weights.sum();
    stage.weights_after = weights;
    if (trace) trace->push_back(std::move(stage));
  }
  return model;
}

ProbabilityPairs predict_proba(const AdaBoostModel& model, const Eigen::MatrixXd& rows) {
  const double total = std::accumulate(model.alphas.begin(), model.alphas.end(), 0.0);
  Eigen::VectorXd positive = Eigen::VectorXd::Constant(rows.rows(), 0.5);
  if (total > 0.0) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      double mass = 0.0;
      for (std::size_t t = 0; t < model.stumps.size(); ++t) {
        if (stump_vote(model.stumps[t], rows.row(i)) > 0) mass += model.alphas[t];
      }
      positive(i) = mass / total;
    }
  }
  return to_pairs(positive);
}

double mean_logistic_loss(const Eigen::VectorXi& y, const Eigen::VectorXd& score) {
  double loss = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    // log(1 + e^{-z}) for y = 1, log(1 + e^{z}) for y = 0, computed stably.
    const double z = y(i) == 1 ? score(i) : -score(i);
    loss += z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
  }
  return loss / static_cast<double>(y.size());
}

namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& z) {
  return z.unaryExpr([](double v) { return stackml::sigmoid(v); });
}

}  // namespace

GbmModel fit_gbm(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                 const GbmParams& params, std::uint64_t seed, std::vector<double>* loss_trace) {
  require_both_classes(labels, "gbm");
  GbmModel model;
  model.params = params;
  model.initial_score = prior_log_odds(labels);
  const Eigen::Index n = features.rows();
  const Eigen::VectorXd y = labels.cast<double>();
  Eigen::VectorXd score = Eigen::VectorXd::Constant(n, model.initial_score);

  for (int t = 0; t < params.n_stages; ++t) {
    const Eigen::VectorXd p = sigmoid(score);
    const Eigen::VectorXd residual = y - p;
    TreeConfig config = params.tree;
    config.criterion = SplitCriterion::variance;
    config.seed = derive_seed(seed, static_cast<std::uint64_t>(t));
    DecisionTree tree = fit_tree(features, RegressionTargets{residual}, config);

    std::vector<double> numerator(tree.nodes.size(), 0.0);
    std::vector<double> denominator(tree.nodes.size(), 0.0);
    std::vector<int> leaf_of(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      const int leaf = leaf_index(tree, features.row(i));
      leaf_of[static_cast<std::size_t>(i)] = leaf;
      numerator[static_cast<std::size_t>(leaf)] += residual(i);
      denominator[static_cast<std::size_t>(leaf)] += p(i) * (1.0 - p(i));
    }
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
      if (!tree.nodes[k].is_leaf()) continue;
      tree.nodes[k].value = denominator[k] < 1e-12 ? 0.0 : numerator[k] / denominator[k];
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      score(i) += params.learning_rate *
                  tree.nodes[static_cast<std::size_t>(leaf_of[static_cast<std::size_t>(i)])].value;
    }
    model.stages.push_back(std::move(tree));
    if (loss_trace) loss_trace->push_back(mean_logistic_loss(labels, score));
  }
  return model;
}

Eigen::VectorXd decision_function(const GbmModel& model, const Eigen::MatrixXd& rows) {
  Eigen::VectorXd score = Eigen::VectorXd::Constant(rows.rows(), model.initial_score);
  for (const auto& tree : model.stages) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      score(i) += model.params.learning_rate * tree_predict_value(tree, rows.row(i));
    }
  }
  return score;
}

ProbabilityPairs predict_proba(const GbmModel& model, const Eigen::MatrixXd& rows) {
  return to_pairs(sigmoid(decision_function(model, rows)));
}

XgbModel fit_xgb(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                 const XgbParams& params, std::uint64_t seed) {
  require_both_classes(labels, "xgb");
  if (params.lambda < 0.0 || params.gamma < 0.0) {
    throw std::invalid_argument("xgb: lambda and gamma must be nonnegative");
  }
  XgbModel model;
  model.params = params;
  model.initial_score = prior_log_odds(labels);
  const Eigen::Index n = features.rows();
  const Eigen::VectorXd y = labels.cast<double>();
  Eigen::VectorXd score = Eigen::VectorXd::Constant(n, model.initial_score);

  TreeConfig config;
  config.criterion = SplitCriterion::second_order;
  config.max_depth = params.max_depth;
  config.min_samples_leaf = params.min_samples_leaf;
  config.l2_regularization = params.lambda;
  config.split_penalty = params.gamma;

  for (int t = 0; t < params.n_stages; ++t) {
    const Eigen::VectorXd p = sigmoid(score);
    const Eigen::VectorXd gradient = p - y;
    const Eigen::VectorXd hessian = (p.array() * (1.0 - p.array())).matrix();
    config.seed = derive_seed(seed, static_cast<std::uint64_t>(t));
    DecisionTree tree = fit_tree(features, GradientTargets{gradient, hessian}, config);
    for (Eigen::Index i = 0; i < n; ++i) {
      score(i) += params.learning_rate * tree_predict_value(tree, features.row(i));
    }
    model.stages.push_back(std::move(tree));
  }
  return model;
}

Eigen::VectorXd decision_function(const XgbModel& model, const Eigen::MatrixXd& rows) {
  Eigen::VectorXd score = Eigen::VectorXd::Constant(rows.rows(), model.initial_score);
  for (const auto& tree : model.stages) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      score(i) += model.params.learning_rate * tree_predict_value(tree, rows.row(i));
    }
  }
  return score;
}

ProbabilityPairs predict_proba(const XgbModel& model, const Eigen::MatrixXd& rows) {
  return to_pairs(sigmoid(decision_function(model, rows)));
}

}  // namespace stackml
