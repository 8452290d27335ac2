#include "stackml/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace stackml {

Eigen::ArrayXd ClassDistribution::probabilities() const {
  const double t = total();
  if (!(t > 0.0)) throw std::invalid_argument("class distribution has zero total weight");
  return weights / t;
}

double gini_impurity(const ClassDistribution& dist) {
  return 1.0 - dist.probabilities().square().sum();
}

double entropy(const ClassDistribution& dist) {
  const Eigen::ArrayXd p = dist.probabilities();
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > 0.0) h -= p(i) * std::log2(p(i));
  }
  return h;
}

int MaxFeatures::resolve(int d) const {
  switch (kind) {
    case Kind::all:
      return d;
    case Kind::sqrt:
      return std::max(1, static_cast<int>(std::sqrt(static_cast<double>(d))));
    case Kind::count:
      return std::clamp(count, 1, d);
  }
  return d;
}

bool TreeNode::operator==(const TreeNode& other) const {
  return feature == other.feature && threshold == other.threshold && left == other.left &&
         right == other.right && depth == other.depth &&
         distribution.size() == other.distribution.size() &&
         (distribution == other.distribution).all() && value == other.value &&
         gradient_sum == other.gradient_sum && hessian_sum == other.hessian_sum;
}

int DecisionTree::depth() const {
  int d = 0;
  for (const auto& node : nodes) d = std::max(d, node.depth);
  return d;
}

int DecisionTree::leaf_count() const {
  return static_cast<int>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

namespace {

// Sufficient statistics of a set of rows for every criterion.
struct NodeStats {
  Eigen::ArrayXd classes;  // classification: per-class weight
  double weight = 0.0;
  double sum = 0.0;      // regression: sum w*y; second order: sum w*g
  double sum_sq = 0.0;   // regression: sum w*y^2
  double hessian = 0.0;  // second order: sum w*h
  int count = 0;
};

class SplitProblem {
 public:
  SplitProblem(const Eigen::MatrixXd& x, const TreeTargets& targets,
               const Eigen::VectorXd& weights, const TreeConfig& config)
      : x_(x), targets_(targets), weights_(weights), config_(config) {
    if (const auto* c = std::get_if<ClassTargets>(&targets_)) n_classes_ = c->n_classes;
  }

  const TreeConfig& config() const { return config_; }
  int n_classes() const { return n_classes_; }
  bool classification() const { return std::holds_alternative<ClassTargets>(targets_); }
  bool second_order() const { return std::holds_alternative<GradientTargets>(targets_); }

  NodeStats empty_stats() const {
    NodeStats s;
    if (classification()) s.classes = Eigen::ArrayXd::Zero(n_classes_);
    return s;
  }

  void add(NodeStats& s, int row) const {
    const double w = weights_(row);
    s.weight += w;
    ++s.count;
    std::visit(
        [&](const auto& t) {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, ClassTargets>) {
            s.classes(t.labels(row)) += w;
          } else if constexpr (std::is_same_v<T, RegressionTargets>) {
            const double y = t.values(row);
            s.sum += w * y;
            s.sum_sq += w * y * y;
          } else {
            s.sum += w * t.gradients(row);
            s.hessian += w * t.hessians(row);
          }
        },
        targets_);
  }

  NodeStats stats_of(std::span<const int> rows) const {
    NodeStats s = empty_stats();
    for (const int r : rows) add(s, r);
    return s;
  }

  static NodeStats difference(const NodeStats& total, const NodeStats& left) {
    NodeStats r;
    if (total.classes.size() > 0) r.classes = (total.classes - left.classes).max(0.0);
    r.weight = total.weight - left.weight;
    r.sum = total.sum - left.sum;
    r.sum_sq = total.sum_sq - left.sum_sq;
    r.hessian = total.hessian - left.hessian;
    r.count = total.count - left.count;
    return r;
  }

  double impurity(const NodeStats& s) const {
    const ClassDistribution dist{s.classes};
    return config_.criterion == SplitCriterion::entropy ? entropy(dist) : gini_impurity(dist);
  }

  double gain(const NodeStats& parent, const NodeStats& left, const NodeStats& right) const {
    if (classification()) {
      return impurity(parent) - (left.weight / parent.weight) * impurity(left) -
             (right.weight / parent.weight) * impurity(right);
    }
    if (second_order()) {
      const double lambda = config_.l2_regularization;
      const auto score = [lambda](double g, double h) { return g * g / (h + lambda); };
      return 0.5 * (score(left.sum, left.hessian) + score(right.sum, right.hessian) -
                    score(parent.sum, parent.hessian)) -
             config_.split_penalty;
    }
    // Weighted variance reduction, expressed through sums.
    return (left.sum * left.sum / left.weight + right.sum * right.sum / right.weight -
            parent.sum * parent.sum / parent.weight) /
           parent.weight;
  }

  double value(int row, int feature) const { return x_(row, feature); }

  // Best split over `rows` restricted to `candidates` (sorted ascending).
  // Accepts only candidates with gain > min_gain.
  std::optional<SplitCandidate> find(std::span<const int> rows, const std::vector<int>& candidates,
                                     Rng& rng, double min_gain) const {
    const NodeStats parent = stats_of(rows);
    const int min_leaf = std::max(1, config_.min_samples_leaf);
    std::optional<SplitCandidate> best;
    double best_gain = min_gain;
    const auto consider = [&](int feature, double threshold, const NodeStats& left,
                              const NodeStats& right) {
      if (left.count < min_leaf || right.count < min_leaf) return;
      if (!(left.weight > 0.0) || !(right.weight > 0.0)) return;
      const double g = gain(parent, left, right);
      if (g > best_gain) {
        best_gain = g;
        best = SplitCandidate{feature,     threshold,    g,           left.count,
                              right.count, left.weight,  right.weight};
      }
    };

    std::vector<std::pair<double, int>> order(rows.size());
    for (const int feature : candidates) {
      if (config_.threshold_mode == ThresholdMode::best) {
        for (std::size_t i = 0; i < rows.size(); ++i) order[i] = {value(rows[i], feature), rows[i]};
        std::sort(order.begin(), order.end());
        NodeStats left = empty_stats();
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
          add(left, order[i].second);
          const double lo = order[i].first;
          const double hi = order[i + 1].first;
          if (lo == hi) continue;
          double threshold = lo + (hi - lo) / 2.0;
          if (!(threshold < hi)) threshold = lo;
          consider(feature, threshold, left, difference(parent, left));
        }
      } else {
        double lo = value(rows[0], feature);
        double hi = lo;
        for (const int r : rows) {
          lo = std::min(lo, value(r, feature));
          hi = std::max(hi, value(r, feature));
        }
        if (!(lo < hi)) continue;
        const double threshold = rng.uniform_open(lo, hi);
        NodeStats left = empty_stats();
        for (const int r : rows) {
          if (value(r, feature) <= threshold) add(left, r);
        }
        consider(feature, threshold, left, difference(parent, left));
      }
    }
    return best;
  }

 private:
  const Eigen::MatrixXd& x_;
  const TreeTargets& targets_;
  const Eigen::VectorXd& weights_;
  const TreeConfig& config_;
  int n_classes_ = 0;
};

void validate_inputs(const Eigen::MatrixXd& x, const TreeTargets& targets,
                     const Eigen::VectorXd& weights) {
  const Eigen::Index n = x.rows();
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, ClassTargets>) {
          if (t.labels.size() != n) throw std::invalid_argument("label count != row count");
          if (t.n_classes < 1) throw std::invalid_argument("n_classes must be positive");
          for (Eigen::Index i = 0; i < n; ++i) {
            if (t.labels(i) < 0 || t.labels(i) >= t.n_classes) {
              throw std::invalid_argument("class label out of range");
            }
          }
        } else if constexpr (std::is_same_v<T, RegressionTargets>) {
          if (t.values.size() != n) throw std::invalid_argument("target count != row count");
          if (!t.values.allFinite()) throw std::invalid_argument("regression targets not finite");
        } else {
          if (t.gradients.size() != n || t.hessians.size() != n) {
            throw std::invalid_argument("gradient count != row count");
          }
        }
      },
      targets);
  if (weights.size() != n) throw std::invalid_argument("weight count != row count");
  if ((weights.array() < 0.0).any() || !weights.allFinite()) {
    throw std::invalid_argument("weights must be finite and nonnegative");
  }
}

std::vector<int> positive_weight_rows(const Eigen::VectorXd& weights) {
  std::vector<int> rows;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights(i) > 0.0) rows.push_back(static_cast<int>(i));
  }
  return rows;
}

class TreeBuilder {
 public:
  TreeBuilder(const SplitProblem& problem, DecisionTree& tree, const TreeTargets& targets)
      : problem_(problem), tree_(tree), targets_(targets) {}

  int build(std::vector<int>& rows, int depth) {
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    tree_.nodes.back().depth = depth;

    const TreeConfig& config = problem_.config();
    const NodeStats stats = problem_.stats_of(rows);
    std::optional<SplitCandidate> split;
    const bool depth_left = !config.max_depth || depth < *config.max_depth;
    if (depth_left && static_cast<int>(rows.size()) >= config.min_samples_split && !pure(rows)) {
      Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(index)));
      const auto candidates = sample_without_replacement(
          rng, tree_.n_features, config.max_features.resolve(tree_.n_features));
      const double min_gain = problem_.classification() ? -kMinSplitGain : kMinSplitGain;
      split = problem_.find(rows, candidates, rng, min_gain);
    }
    if (!split) {
      make_leaf(tree_.nodes[static_cast<std::size_t>(index)], stats);
      return index;
    }

    std::vector<int> left;
    std::vector<int> right;
    for (const int r : rows) {
      (problem_.value(r, split->feature) <= split->threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    tree_.nodes[static_cast<std::size_t>(index)].feature = split->feature;
    tree_.nodes[static_cast<std::size_t>(index)].threshold = split->threshold;
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    tree_.nodes[static_cast<std::size_t>(index)].left = l;
    tree_.nodes[static_cast<std::size_t>(index)].right = r;
    return index;
  }

 private:
  bool pure(const std::vector<int>& rows) const {
    return std::visit(
        [&](const auto& t) {
          using T = std::decay_t<decltype(t)>;
          if constexpr (std::is_same_v<T, ClassTargets>) {
            return std::all_of(rows.begin(), rows.end(),
                               [&](int r) { return t.labels(r) == t.labels(rows[0]); });
          } else if constexpr (std::is_same_v<T, RegressionTargets>) {
            return std::all_of(rows.begin(), rows.end(),
                               [&](int r) { return t.values(r) == t.values(rows[0]); });
          } else {
            return false;
          }
        },
        targets_);
  }

  void make_leaf(TreeNode& node, const NodeStats& stats) const {
    if (problem_.classification()) {
      node.distribution = stats.classes;
    } else if (problem_.second_order()) {
      node.gradient_sum = stats.sum;
      node.hessian_sum = stats.hessian;
      node.value = -stats.sum / (stats.hessian + problem_.config().l2_regularization);
    } else {
      node.value = stats.sum / stats.weight;
    }
  }

  const SplitProblem& problem_;
  DecisionTree& tree_;
  const TreeTargets& targets_;
};

}  // namespace

std::optional<SplitCandidate> best_split(const Eigen::MatrixXd& features,
                                         const TreeTargets& targets,
                                         const Eigen::VectorXd& weights,
                                         const std::vector<int>& candidate_features,
                                         const TreeConfig& config) {
  validate_inputs(features, targets, weights);
  const auto rows = positive_weight_rows(weights);
  if (rows.empty()) throw std::invalid_argument("best_split: all weights are zero");
  if (static_cast<int>(rows.size()) < std::max(2, config.min_samples_split)) return std::nullopt;
  std::vector<int> candidates = candidate_features;
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  for (const int f : candidates) {
    if (f < 0 || f >= features.cols()) throw std::invalid_argument("candidate feature out of range");
  }
  Rng rng(derive_seed(config.seed, 0));
  const SplitProblem problem(features, targets, weights, config);
  return problem.find(rows, candidates, rng, kMinSplitGain);
}

DecisionTree fit_tree(const Eigen::MatrixXd& features, const TreeTargets& targets,
                      const Eigen::VectorXd& weights, const TreeConfig& config) {
  if (features.rows() == 0) throw std::invalid_argument("fit_tree: empty data");
  validate_inputs(features, targets, weights);
  auto rows = positive_weight_rows(weights);
  if (rows.empty()) throw std::invalid_argument("fit_tree: all weights are zero");

  const bool class_targets = std::holds_alternative<ClassTargets>(targets);
  const bool criterion_ok =
      class_targets ? (config.criterion == SplitCriterion::gini ||
                       config.criterion == SplitCriterion::entropy)
                    : (std::holds_alternative<GradientTargets>(targets)
                           ? config.criterion == SplitCriterion::second_order
                           : config.criterion == SplitCriterion::variance);
  if (!criterion_ok) throw std::invalid_argument("fit_tree: criterion does not match targets");

  DecisionTree tree;
  tree.mode = class_targets ? TreeMode::classification : TreeMode::regression;
  tree.criterion = config.criterion;
  tree.n_features = static_cast<int>(features.cols());
  tree.n_classes = class_targets ? std::get<ClassTargets>(targets).n_classes : 0;

  const SplitProblem problem(features, targets, weights, config);
  TreeBuilder(problem, tree, targets).build(rows, 0);
  return tree;
}

DecisionTree fit_tree(const Eigen::MatrixXd& features, const TreeTargets& targets,
                      const TreeConfig& config) {
  return fit_tree(features, targets, Eigen::VectorXd::Ones(features.rows()), config);
}

int leaf_index(const DecisionTree& tree, RowRef row) {
  if (row.size() != tree.n_features) {
    throw std::invalid_argument("row has " + std::to_string(row.size()) +
                                " features, tree expects " + std::to_string(tree.n_features));
  }
  int i = 0;
  while (!tree.nodes[static_cast<std::size_t>(i)].is_leaf()) {
    const auto& node = tree.nodes[static_cast<std::size_t>(i)];
    i = row(node.feature) <= node.threshold ? node.left : node.right;
  }
  return i;
}

Eigen::ArrayXd tree_predict_distribution(const DecisionTree& tree, RowRef row) {
  if (tree.mode != TreeMode::classification) {
    throw std::invalid_argument("tree_predict_distribution on a regression tree");
  }
  const auto& leaf = tree.nodes[static_cast<std::size_t>(leaf_index(tree, row))];
  return ClassDistribution{leaf.distribution}.probabilities();
}

double tree_predict_value(const DecisionTree& tree, RowRef row) {
  if (tree.mode != TreeMode::regression) {
    throw std::invalid_argument("tree_predict_value on a classification tree");
  }
  return tree.nodes[static_cast<std::size_t>(leaf_index(tree, row))].value;
}

Eigen::VectorXd tree_predict_positive(const DecisionTree& tree, const Eigen::MatrixXd& rows) {
  Eigen::VectorXd p(rows.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const Eigen::ArrayXd dist = tree_predict_distribution(tree, rows.row(i));
    p(i) = dist.size() > 1 ? dist(1) : 0.0;
  }
  return p;
}

}  // namespace stackml
