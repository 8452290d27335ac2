#include "stackml/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace stackml {

KnnModel fit_knn(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                 const KnnParams& params) {
  if (features.rows() == 0) throw std::invalid_argument("knn: empty training set");
  if (params.k < 1 || params.k > features.rows()) {
    throw std::invalid_argument("knn: k = " + std::to_string(params.k) + " outside [1, " +
                                std::to_string(features.rows()) + "]");
  }
  return KnnModel{params, features, labels};
}

std::vector<int> nearest_neighbors(const KnnModel& model, RowRef query, int k) {
  if (query.size() != model.features.cols()) {
    throw std::invalid_argument("knn: query has " + std::to_string(query.size()) +
                                " features, model expects " +
                                std::to_string(model.features.cols()));
  }
  const auto n = static_cast<int>(model.features.rows());
  std::vector<std::pair<double, int>> dist(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    dist[static_cast<std::size_t>(i)] = {(model.features.row(i) - query).squaredNorm(), i};
  }
  const auto kk = static_cast<std::size_t>(std::min(k, n));
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());
  std::vector<int> out(kk);
  for (std::size_t i = 0; i < kk; ++i) out[i] = dist[i].second;
  return out;
}

ProbabilityPairs predict_proba(const KnnModel& model, const Eigen::MatrixXd& rows) {
  if (model.features.rows() == 0) throw std::logic_error("knn model is not fitted");
  const int k = model.params.k;
  Eigen::VectorXd positive(rows.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    int hits = 0;
    for (const int j : nearest_neighbors(model, rows.row(i), k)) hits += model.labels(j) == 1;
    positive(i) = static_cast<double>(hits) / static_cast<double>(k);
  }
  return to_pairs(positive);
}

namespace {

void check_linear_inputs(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const char* who) {
  if (x.rows() != y.size()) throw std::invalid_argument(std::string(who) + ": row/label mismatch");
  require_both_classes(y, who);
}

}  // namespace

LinearModel fit_logistic_regression(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                                    const LinearParams& params, std::uint64_t seed,
                                    std::vector<double>* loss_trace) {
  check_linear_inputs(features, labels, "logistic regression");
  LinearModel model;
  model.kind = LinearKind::logistic;
  model.params = params;
  model.seed = seed;
  model.weights = Eigen::VectorXd::Zero(features.cols());
  model.bias = 0.0;

  const auto n = static_cast<double>(features.rows());
  const Eigen::VectorXd y = labels.cast<double>();
  const auto objective = [&](const Eigen::VectorXd& z) {
    return mean_logistic_loss(labels, z) + 0.5 * params.l2 * model.weights.squaredNorm();
  };
  Eigen::VectorXd z = Eigen::VectorXd::Zero(features.rows());
  if (loss_trace) loss_trace->push_back(objective(z));
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    const Eigen::VectorXd residual = z.unaryExpr([](double v) { return sigmoid(v); }) - y;
    const Eigen::VectorXd grad_w = features.transpose() * residual / n + params.l2 * model.weights;
    const double grad_b = residual.sum() / n;
    model.weights -= params.learning_rate * grad_w;
    model.bias -= params.learning_rate * grad_b;
    z = (features * model.weights).array() + model.bias;
    if (loss_trace) loss_trace->push_back(objective(z));
  }
  return model;
}

LinearModel fit_linear_svc(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                           const LinearParams& params, std::uint64_t seed) {
  check_linear_inputs(features, labels, "linear svc");
  LinearModel model;
  model.kind = LinearKind::svc;
  model.params = params;
  model.seed = seed;
  model.weights = Eigen::VectorXd::Zero(features.cols());
  model.bias = 0.0;

  const auto n = static_cast<double>(features.rows());
  const Eigen::ArrayXd sign = (2 * labels.array() - 1).cast<double>();
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    const Eigen::ArrayXd margin =
        sign * ((features * model.weights).array() + model.bias);
    // d/dw of max(0, 1 - s(w.x + b)) is -s x where the margin is violated.
    const Eigen::VectorXd active = (margin < 1.0).select(-sign, 0.0).matrix();
    const Eigen::VectorXd grad_w = features.transpose() * active / n + params.l2 * model.weights;
    const double grad_b = active.sum() / n;
    model.weights -= params.learning_rate * grad_w;
    model.bias -= params.learning_rate * grad_b;
  }
  return model;
}

Eigen::VectorXd decision_function(const LinearModel& model, const Eigen::MatrixXd& rows) {
  if (rows.cols() != model.weights.size()) {
    throw std::invalid_argument("linear model expects " + std::to_string(model.weights.size()) +
                                " features, got " + std::to_string(rows.cols()));
  }
  return (rows * model.weights).array() + model.bias;
}

ProbabilityPairs predict_proba(const LinearModel& model, const Eigen::MatrixXd& rows) {
  return to_pairs(decision_function(model, rows).unaryExpr([](double z) { return sigmoid(z); }));
}

MlpModel init_mlp(int n_features, const MlpParams& params, std::uint64_t seed) {
  if (params.hidden_size < 1) throw std::invalid_argument("mlp: hidden_size must be >= 1");
  MlpModel model;
  model.params = params;
  model.seed = seed;
  const int h = params.hidden_size;
  Rng rng(seed);
  const auto draw = [&rng](double bound) { return bound * (2.0 * rng.uniform() - 1.0); };
  const double hidden_bound = 1.0 / std::sqrt(static_cast<double>(n_features));
  model.hidden_weights.resize(h, n_features);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < n_features; ++j) model.hidden_weights(i, j) = draw(hidden_bound);
  }
  model.hidden_bias = Eigen::VectorXd::Zero(h);
  const double output_bound = 1.0 / std::sqrt(static_cast<double>(h));
  model.output_weights.resize(h);
  for (int i = 0; i < h; ++i) model.output_weights(i) = draw(output_bound);
  model.output_bias = 0.0;
  return model;
}

namespace {

Eigen::MatrixXd hidden_activations(const MlpModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.hidden_weights.cols()) {
    throw std::invalid_argument("mlp expects " + std::to_string(model.hidden_weights.cols()) +
                                " features, got " + std::to_string(x.cols()));
  }
  Eigen::MatrixXd pre = x * model.hidden_weights.transpose();
  pre.rowwise() += model.hidden_bias.transpose();
  return pre.unaryExpr([](double v) { return sigmoid(v); });
}

}  // namespace

MlpGradient mlp_loss_gradient(const MlpModel& model, const Eigen::MatrixXd& features,
                              const Eigen::VectorXi& labels) {
  const auto n = static_cast<double>(features.rows());
  const Eigen::MatrixXd a = hidden_activations(model, features);
  const Eigen::VectorXd z = (a * model.output_weights).array() + model.output_bias;
  const Eigen::VectorXd p = z.unaryExpr([](double v) { return sigmoid(v); });

  MlpGradient grad;
  grad.loss = mean_logistic_loss(labels, z);
  const Eigen::VectorXd dz = (p - labels.cast<double>()) / n;
  grad.output_weights = a.transpose() * dz;
  grad.output_bias = dz.sum();
  const Eigen::MatrixXd dh =
      ((dz * model.output_weights.transpose()).array() * a.array() * (1.0 - a.array())).matrix();
  grad.hidden_weights = dh.transpose() * features;
  grad.hidden_bias = dh.colwise().sum().transpose();
  return grad;
}

double mlp_loss(const MlpModel& model, const Eigen::MatrixXd& features,
                const Eigen::VectorXi& labels) {
  return mean_logistic_loss(labels, decision_function(model, features));
}

MlpModel fit_mlp(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                 const MlpParams& params, std::uint64_t seed) {
  check_linear_inputs(features, labels, "mlp");
  MlpModel model = init_mlp(static_cast<int>(features.cols()), params, seed);
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    const MlpGradient grad = mlp_loss_gradient(model, features, labels);
    model.hidden_weights -= params.learning_rate * grad.hidden_weights;
    model.hidden_bias -= params.learning_rate * grad.hidden_bias;
    model.output_weights -= params.learning_rate * grad.output_weights;
    model.output_bias -= params.learning_rate * grad.output_bias;
  }
  return model;
}

Eigen::VectorXd decision_function(const MlpModel& model, const Eigen::MatrixXd& rows) {
  return (hidden_activations(model, rows) * model.output_weights).array() + model.output_bias;
}

ProbabilityPairs predict_proba(const MlpModel& model, const Eigen::MatrixXd& rows) {
  return to_pairs(decision_function(model, rows).unaryExpr([](double z) { return sigmoid(z); }));
}

}  // namespace stackml
