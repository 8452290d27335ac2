#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace stackml {

// Positive class is label 1.
struct ConfusionMatrix {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion(const Eigen::VectorXi& labels, const Eigen::VectorXi& predictions);

// Metrics with a zero denominator are reported as 0 and flagged.
struct ThresholdMetrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
  bool precision_degenerate = false;
  bool sensitivity_degenerate = false;
  bool specificity_degenerate = false;
  bool f1_degenerate = false;

  bool degenerate() const {
    return precision_degenerate || sensitivity_degenerate || specificity_degenerate ||
           f1_degenerate;
  }
};

ThresholdMetrics threshold_metrics(const ConfusionMatrix& cm);

// Matthews correlation; 0 when any marginal is empty.
double mcc(const ConfusionMatrix& cm);

inline constexpr double kLogLossEpsilon = 1e-15;

// Mean negative log-likelihood with P(1) clipped to [eps, 1 - eps].
double log_loss(const Eigen::VectorXi& labels, const Eigen::VectorXd& positive,
                double epsilon = kLogLossEpsilon);

struct RocCurve {
  std::vector<double> fpr;
  std::vector<double> tpr;
  // thresholds[i] produced point i (score >= threshold is positive); the
  // leading (0, 0) point carries +infinity.
  std::vector<double> thresholds;
};

// One point per distinct score, highest first, plus the (0, 0) origin.
RocCurve roc_curve(const Eigen::VectorXi& labels, const Eigen::VectorXd& scores);

// Trapezoidal area under the curve.
double auc(const RocCurve& curve);

Eigen::VectorXi hard_predictions(const Eigen::VectorXd& positive, double threshold = 0.5);

// `standard` scores roc and log-loss on P(1); `paper` scores them on the
// thresholded labels, so that roc = (sensitivity + specificity) / 2.
enum class MetricsMode { standard, paper };

struct EvaluationRow {
  std::string model_name;
  double accuracy = 0.0;
  double prc = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
  double roc = 0.0;
  double log_loss = 0.0;
  double mcc = 0.0;
};

// Metric column names in report order.
const std::vector<std::string>& metric_names();
std::vector<double> metric_values(const EvaluationRow& row);

EvaluationRow evaluate_all(const std::string& model_name, const Eigen::VectorXi& labels,
                           const Eigen::VectorXd& positive,
                           MetricsMode mode = MetricsMode::standard, double threshold = 0.5);

}  // namespace stackml
