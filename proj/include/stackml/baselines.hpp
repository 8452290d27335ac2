#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "stackml/ensemble.hpp"

namespace stackml {

struct KnnParams {
  int k = 5;
  bool operator==(const KnnParams&) const = default;
};

struct KnnModel {
  KnnParams params;
  Eigen::MatrixXd features;
  Eigen::VectorXi labels;

  bool operator==(const KnnModel&) const = default;
};

KnnModel fit_knn(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                 const KnnParams& params);

// Training-row indices of the k nearest rows by Euclidean distance, closest
// first; equal distances go to the lower index.
std::vector<int> nearest_neighbors(const KnnModel& model, RowRef query, int k);

// P(1) = share of label-1 rows among the k nearest.
ProbabilityPairs predict_proba(const KnnModel& model, const Eigen::MatrixXd& rows);

enum class LinearKind { logistic, svc };

struct LinearParams {
  int epochs = 500;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  bool operator==(const LinearParams&) const = default;
};

struct LinearModel {
  LinearKind kind = LinearKind::logistic;
  LinearParams params;
  std::uint64_t seed = 0;
  Eigen::VectorXd weights;
  double bias = 0.0;

  bool operator==(const LinearModel&) const = default;
};

// Full-batch gradient descent on mean log-loss + (l2/2)|w|^2 from a zero
// start. `loss_trace` receives the objective before the first epoch and after
// every epoch. The seed is stored but unused.
LinearModel fit_logistic_regression(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                                    const LinearParams& params, std::uint64_t seed,
                                    std::vector<double>* loss_trace = nullptr);

// Full-batch subgradient descent on mean hinge loss + (l2/2)|w|^2, labels
// mapped to {-1, +1}, zero start.
LinearModel fit_linear_svc(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                           const LinearParams& params, std::uint64_t seed);

Eigen::VectorXd decision_function(const LinearModel& model, const Eigen::MatrixXd& rows);

// sigmoid(w.x + b) for both kinds. For the SVC this is an uncalibrated
// squashing of the margin.
ProbabilityPairs predict_proba(const LinearModel& model, const Eigen::MatrixXd& rows);

struct MlpParams {
  int hidden_size = 16;
  int epochs = 300;
  double learning_rate = 0.1;
  bool operator==(const MlpParams&) const = default;
};

// D -> H -> 1 network, logistic activations on both layers.
struct MlpModel {
  MlpParams params;
  std::uint64_t seed = 0;
  Eigen::MatrixXd hidden_weights;  // H x D
  Eigen::VectorXd hidden_bias;     // H
  Eigen::VectorXd output_weights;  // H
  double output_bias = 0.0;

  bool operator==(const MlpModel&) const = default;
};

struct MlpGradient {
  double loss = 0.0;
  Eigen::MatrixXd hidden_weights;
  Eigen::VectorXd hidden_bias;
  Eigen::VectorXd output_weights;
  double output_bias = 0.0;
};

// Weights uniform in +-1/sqrt(fan_in), biases zero.
MlpModel init_mlp(int n_features, const MlpParams& params, std::uint64_t seed);

// Mean log-loss and its exact gradient by backpropagation.
MlpGradient mlp_loss_gradient(const MlpModel& model, const Eigen::MatrixXd& features,
                              const Eigen::VectorXi& labels);
double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& features,
                const Eigen::VectorXi& labels);

MlpModel fit_mlp(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                 const MlpParams& params, std::uint64_t seed);

Eigen::VectorXd decision_function(const MlpModel& model, const Eigen::MatrixXd& rows);
ProbabilityPairs predict_proba(const MlpModel& model, const Eigen::MatrixXd& rows);

}  // namespace stackml
