#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <vector>

#include "stackml/parallel.hpp"
#include "stackml/tree.hpp"

namespace stackml {

// Column 0 holds P(class 0), column 1 holds P(class 1).
using ProbabilityPairs = Eigen::Matrix<double, Eigen::Dynamic, 2>;

// Builds (1 - p, p) rows from P(class 1).
ProbabilityPairs to_pairs(const Eigen::VectorXd& positive);

// Throws DataShapeError unless both classes occur in `labels`.
void require_both_classes(const Eigen::VectorXi& labels, const char* who);

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Mean log-loss of logit scores, computed as log1p(exp(-z)) without overflow.
double mean_logistic_loss(const Eigen::VectorXi& labels, const Eigen::VectorXd& scores);

enum class ForestKind { random_forest, extra_trees };

struct ForestParams {
  int n_trees = 100;
  MaxFeatures max_features = MaxFeatures::sqrt();
  bool bootstrap = true;
  // Criterion and size limits for every member tree. max_features,
  // threshold_mode and seed are overridden per tree.
  TreeConfig tree;

  bool operator==(const ForestParams&) const = default;
};

struct ForestModel {
  ForestKind kind = ForestKind::random_forest;
  ForestParams params;
  std::uint64_t seed = 0;
  std::vector<DecisionTree> trees;

  bool operator==(const ForestModel&) const = default;
};

// Tree t draws its bootstrap sample and its node seeds from a generator
// seeded by (seed, t) alone, so the fitted forest does not depend on
// `parallelism`.
ForestModel fit_random_forest(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                              const ForestParams& params, std::uint64_t seed,
                              Parallelism parallelism = {});

// No bootstrap and a uniformly drawn threshold per candidate feature at every
// node. `params.bootstrap` is ignored.
ForestModel fit_extra_trees(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                            const ForestParams& params, std::uint64_t seed,
                            Parallelism parallelism = {});

// Mean of the member trees' leaf distributions.
ProbabilityPairs predict_proba(const ForestModel& model, const Eigen::MatrixXd& rows);

struct AdaBoostParams {
  int n_stages = 50;
  TreeConfig base = [] {
    TreeConfig c;
    c.max_depth = 1;
    return c;
  }();

  bool operator==(const AdaBoostParams&) const = default;
};

struct AdaBoostModel {
  AdaBoostParams params;
  std::vector<DecisionTree> stumps;
  std::vector<double> alphas;

  bool operator==(const AdaBoostModel&) const = default;
};

// Error rates below this are treated as zero; alpha is capped at the value
// this rate would give and fitting stops.
inline constexpr double kAdaBoostMinError = 1e-10;

struct AdaBoostStage {
  double error = 0.0;
  double alpha = 0.0;
  Eigen::VectorXd weights_before;      // normalized weights the stump was fitted on
  Eigen::VectorXd weights_unnormalized;  // after exp(-alpha y h), before renormalizing
  Eigen::VectorXd weights_after;
  std::vector<bool> misclassified;
  bool accepted = false;
};

// Discrete AdaBoost over {-1, +1}. When `trace` is given, one entry per
// attempted stage (including a rejected final one) is appended.
AdaBoostModel fit_adaboost(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                           const AdaBoostParams& params, std::uint64_t seed,
                           std::vector<AdaBoostStage>* trace = nullptr);

// P(1) = alpha mass of stumps voting +1 over total alpha (0.5 when empty).
ProbabilityPairs predict_proba(const AdaBoostModel& model, const Eigen::MatrixXd& rows);

// Stump vote in {-1, +1}.
int stump_vote(const DecisionTree& stump, RowRef row);

struct GbmParams {
  int n_stages = 100;
  double learning_rate = 0.1;
  TreeConfig tree = [] {
    TreeConfig c;
    c.criterion = SplitCriterion::variance;
    c.max_depth = 3;
    return c;
  }();

  bool operator==(const GbmParams&) const = default;
};

struct GbmModel {
  GbmParams params;
  double initial_score = 0.0;
  std::vector<DecisionTree> stages;

  bool operator==(const GbmModel&) const = default;
};

// Log-loss boosting with Newton leaves: each leaf of the residual tree is
// replaced by sum(r) / sum(p (1 - p)) over its training rows (0 when that
// denominator is below 1e-12). `loss_trace`, when given, receives the
// training log-loss after every stage.
GbmModel fit_gbm(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                 const GbmParams& params, std::uint64_t seed,
                 std::vector<double>* loss_trace = nullptr);

ProbabilityPairs predict_proba(const GbmModel& model, const Eigen::MatrixXd& rows);
Eigen::VectorXd decision_function(const GbmModel& model, const Eigen::MatrixXd& rows);

struct XgbParams {
  int n_stages = 100;
  double learning_rate = 0.3;
  double lambda = 1.0;
  double gamma = 0.0;
  int max_depth = 3;
  int min_samples_leaf = 1;

  bool operator==(const XgbParams&) const = default;
};

struct XgbModel {
  XgbParams params;
  double initial_score = 0.0;
  std::vector<DecisionTree> stages;  // leaves carry gradient_sum / hessian_sum

  bool operator==(const XgbModel&) const = default;
};

// Second-order boosting: g = p - y, h = p (1 - p), split gain
// 0.5 [G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)] - gamma, leaf -G/(H+l).
XgbModel fit_xgb(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                 const XgbParams& params, std::uint64_t seed);

ProbabilityPairs predict_proba(const XgbModel& model, const Eigen::MatrixXd& rows);
Eigen::VectorXd decision_function(const XgbModel& model, const Eigen::MatrixXd& rows);

// ln(pos / neg), the log-odds prior both boosters start from.
double prior_log_odds(const Eigen::VectorXi& labels);

}  // namespace stackml
