#include "stackml/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace stackml {

ConfusionMatrix confusion(const Eigen::VectorXi& labels, const Eigen::VectorXi& predictions) {
  if (labels.size() != predictions.size()) {
    throw std::invalid_argument("confusion: label and prediction lengths differ");
  }
  if (labels.size() == 0) throw std::invalid_argument("confusion: no rows");
  ConfusionMatrix cm;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const int y = labels(i);
    const int p = predictions(i);
    if ((y != 0 && y != 1) || (p != 0 && p != 1)) {
      throw std::invalid_argument("confusion: values must be 0 or 1");
    }
    if (y == 1) {
      ++(p == 1 ? cm.tp : cm.fn);
    } else {
      ++(p == 1 ? cm.fp : cm.tn);
    }
  }
  return cm;
}

ThresholdMetrics threshold_metrics(const ConfusionMatrix& cm) {
  if (cm.total() <= 0) throw std::invalid_argument("threshold_metrics: empty confusion matrix");
  const auto ratio = [](std::int64_t num, std::int64_t den, bool& flag) {
    if (den == 0) {
      flag = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  ThresholdMetrics m;
  m.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  m.precision = ratio(cm.tp, cm.tp + cm.fp, m.precision_degenerate);
  m.sensitivity = ratio(cm.tp, cm.tp + cm.fn, m.sensitivity_degenerate);
  m.specificity = ratio(cm.tn, cm.tn + cm.fp, m.specificity_degenerate);
  if (m.precision + m.sensitivity > 0.0) {
    m.f1 = 2.0 * m.precision * m.sensitivity / (m.precision + m.sensitivity);
  } else {
    m.f1 = 0.0;
    m.f1_degenerate = true;
  }
  return m;
}

double mcc(const ConfusionMatrix& cm) {
  if (cm.total() <= 0) throw std::invalid_argument("mcc: empty confusion matrix");
  using wide = long double;
  const wide tp = static_cast<wide>(cm.tp);
  const wide fp = static_cast<wide>(cm.fp);
  const wide tn = static_cast<wide>(cm.tn);
  const wide fn = static_cast<wide>(cm.fn);
  const wide den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (den == 0) return 0.0;
  return static_cast<double>((tp * tn - fp * fn) / std::sqrt(den));
}

double log_loss(const Eigen::VectorXi& labels, const Eigen::VectorXd& positive, double epsilon) {
  if (labels.size() != positive.size()) {
    throw std::invalid_argument("log_loss: label and probability lengths differ");
  }
  if (labels.size() == 0) throw std::invalid_argument("log_loss: no rows");
  if (!(epsilon > 0.0 && epsilon < 0.5)) throw std::invalid_argument("log_loss: bad epsilon");
  if (!positive.allFinite()) throw std::invalid_argument("log_loss: non-finite probability");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const double p = std::clamp(positive(i), epsilon, 1.0 - epsilon);
    sum += labels(i) == 1 ? std::log(p) : std::log(1.0 - p);
  }
  return -sum / static_cast<double>(labels.size());
}

RocCurve roc_curve(const Eigen::VectorXi& labels, const Eigen::VectorXd& scores) {
  if (labels.size() != scores.size()) {
    throw std::invalid_argument("roc_curve: label and score lengths differ");
  }
  const auto positives = (labels.array() == 1).count();
  const auto negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw std::invalid_argument("roc_curve: labels must contain both classes");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(labels.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return scores(a) > scores(b); });

  RocCurve curve;
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double s = scores(order[i]);
    // Equal scores cross the threshold together.
    for (; i < order.size() && scores(order[i]) == s; ++i) ++(labels(order[i]) == 1 ? tp : fp);
    curve.fpr.push_back(static_cast<double>(fp) / static_cast<double>(negatives));
    curve.tpr.push_back(static_cast<double>(tp) / static_cast<double>(positives));
    curve.thresholds.push_back(s);
  }
  return curve;
}

double auc(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.fpr.size(); ++i) {
    area += (curve.fpr[i] - curve.fpr[i - 1]) * (curve.tpr[i] + curve.tpr[i - 1]) / 2.0;
  }
  return area;
}

Eigen::VectorXi hard_predictions(const Eigen::VectorXd& positive, double threshold) {
  return (positive.array() >= threshold).cast<int>();
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names = {"accuracy", "prc", "sensitivity", "specificity",
                                                 "f1",       "roc", "log_loss",    "mcc"};
  return names;
}

std::vector<double> metric_values(const EvaluationRow& row) {
  return {row.accuracy, row.prc, row.sensitivity, row.specificity,
          row.f1,       row.roc, row.log_loss,    row.mcc};
}

EvaluationRow evaluate_all(const std::string& model_name, const Eigen::VectorXi& labels,
                           const Eigen::VectorXd& positive, MetricsMode mode, double threshold) {
  const Eigen::VectorXi predicted = hard_predictions(positive, threshold);
  const ConfusionMatrix cm = confusion(labels, predicted);
  const ThresholdMetrics t = threshold_metrics(cm);
  EvaluationRow row;
  row.model_name = model_name;
  row.accuracy = t.accuracy;
  row.prc = t.precision;
  row.sensitivity = t.sensitivity;
  row.specificity = t.specificity;
  row.f1 = t.f1;
  row.mcc = mcc(cm);
  const Eigen::VectorXd scored =
      mode == MetricsMode::paper ? Eigen::VectorXd(predicted.cast<double>()) : positive;
  row.roc = auc(roc_curve(labels, scored));
  row.log_loss = log_loss(labels, scored);
  return row;
}

}  // namespace stackml
