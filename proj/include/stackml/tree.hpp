#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "stackml/random.hpp"

namespace stackml {

using RowRef = Eigen::Ref<const Eigen::RowVectorXd, 0, Eigen::InnerStride<>>;

// Per-class weight totals of a node. Probabilities are weight / total.
struct ClassDistribution {
  Eigen::ArrayXd weights;

  double total() const { return weights.sum(); }
  Eigen::ArrayXd probabilities() const;
};

// 1 - sum p_i^2. Throws std::invalid_argument on zero total weight.
double gini_impurity(const ClassDistribution& dist);
// sum -p_i log2 p_i with 0 log 0 = 0. Throws on zero total weight.
double entropy(const ClassDistribution& dist);

enum class SplitCriterion { gini, entropy, variance, second_order };
enum class ThresholdMode { best, random };

struct MaxFeatures {
  enum class Kind { all, sqrt, count };
  Kind kind = Kind::all;
  int count = 0;

  static MaxFeatures all() { return {Kind::all, 0}; }
  static MaxFeatures sqrt() { return {Kind::sqrt, 0}; }
  static MaxFeatures fixed(int m) { return {Kind::count, m}; }

  // Number of candidate features per node for a d-column input (>= 1).
  int resolve(int d) const;
  bool operator==(const MaxFeatures&) const = default;
};

struct TreeConfig {
  SplitCriterion criterion = SplitCriterion::gini;
  std::optional<int> max_depth;
  int min_samples_split = 2;
  int min_samples_leaf = 1;
  MaxFeatures max_features = MaxFeatures::all();
  ThresholdMode threshold_mode = ThresholdMode::best;
  std::uint64_t seed = 0;
  // second_order criterion only: ridge term on leaf weights and per-split penalty.
  double l2_regularization = 1.0;
  double split_penalty = 0.0;

  bool operator==(const TreeConfig&) const = default;
};

// Targets for the three tree flavours. Class labels must lie in [0, n_classes).
struct ClassTargets {
  Eigen::Ref<const Eigen::VectorXi> labels;
  int n_classes = 2;
};
struct RegressionTargets {
  Eigen::Ref<const Eigen::VectorXd> values;
};
struct GradientTargets {
  Eigen::Ref<const Eigen::VectorXd> gradients;
  Eigen::Ref<const Eigen::VectorXd> hessians;
};
using TreeTargets = std::variant<ClassTargets, RegressionTargets, GradientTargets>;

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;  // rows with value <= threshold go left
  double gain = 0.0;
  int left_count = 0;
  int right_count = 0;
  double left_weight = 0.0;
  double right_weight = 0.0;
};

// Splits below this gain count as "no improvement".
inline constexpr double kMinSplitGain = 1e-12;

// Best split of all rows over `candidate_features`. Rows of zero weight are
// ignored entirely. Returns nullopt when no split satisfies min_samples_leaf or
// the best gain does not exceed kMinSplitGain. Ties go to the lowest feature
// index, then the smallest threshold.
std::optional<SplitCandidate> best_split(const Eigen::MatrixXd& features,
                                         const TreeTargets& targets,
                                         const Eigen::VectorXd& weights,
                                         const std::vector<int>& candidate_features,
                                         const TreeConfig& config);

enum class TreeMode { classification, regression };

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int depth = 0;
  // Leaf payload. `distribution` holds class weights for classification
  // trees; `value` is the regression output. Second-order leaves also keep the
  // summed gradient and hessian that produced `value`.
  Eigen::ArrayXd distribution;
  double value = 0.0;
  double gradient_sum = 0.0;
  double hessian_sum = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode& other) const;
};

struct DecisionTree {
  TreeMode mode = TreeMode::classification;
  SplitCriterion criterion = SplitCriterion::gini;
  int n_features = 0;
  int n_classes = 2;
  std::vector<TreeNode> nodes;  // pre-order; nodes[0] is the root

  int depth() const;
  int leaf_count() const;
  bool operator==(const DecisionTree&) const = default;
};

// Greedy recursive partitioning. Candidate features at each node are drawn
// without replacement from a generator seeded by (config.seed, node position).
// Classification trees may split an impure node on a zero-gain split when no
// positive-gain one exists (XOR-like layouts); regression and second-order
// trees never do.
DecisionTree fit_tree(const Eigen::MatrixXd& features, const TreeTargets& targets,
                      const Eigen::VectorXd& weights, const TreeConfig& config);

// Unit-weight convenience overload.
DecisionTree fit_tree(const Eigen::MatrixXd& features, const TreeTargets& targets,
                      const TreeConfig& config);

int leaf_index(const DecisionTree& tree, RowRef row);

// Normalized class probabilities of the leaf reached by `row`.
Eigen::ArrayXd tree_predict_distribution(const DecisionTree& tree, RowRef row);
double tree_predict_value(const DecisionTree& tree, RowRef row);

// P(class 1) for every row of a classification tree.
Eigen::VectorXd tree_predict_positive(const DecisionTree& tree, const Eigen::MatrixXd& rows);

}  // namespace stackml
