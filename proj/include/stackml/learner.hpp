#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stackml/baselines.hpp"
#include "stackml/ensemble.hpp"
#include "stackml/parallel.hpp"
#include "stackml/tree.hpp"

namespace stackml {

// The nine level-0 learners, in default roster order.
enum class LearnerKind { RF, MLP, KNN, ETC, XGB, SVC, ADB, CART, GBM };

std::string_view learner_name(LearnerKind kind);
std::optional<LearnerKind> parse_learner_name(std::string_view name);
const std::vector<LearnerKind>& default_roster();

struct CartParams {
  TreeConfig tree;
  bool operator==(const CartParams&) const = default;
};

struct CartModel {
  CartParams params;
  DecisionTree tree;
  bool operator==(const CartModel&) const = default;
};

CartModel fit_cart(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                   const CartParams& params, std::uint64_t seed);
ProbabilityPairs predict_proba(const CartModel& model, const Eigen::MatrixXd& rows);

// RF and ETC share ForestParams; SVC uses LinearParams.
using LearnerParams = std::variant<ForestParams, MlpParams, KnnParams, XgbParams, LinearParams,
                                   AdaBoostParams, CartParams, GbmParams>;

struct BaseLearnerSpec {
  LearnerKind kind = LearnerKind::CART;
  LearnerParams params;
  std::uint64_t seed = 0;

  std::string name() const { return std::string(learner_name(kind)); }
  bool operator==(const BaseLearnerSpec&) const = default;
};

// Spec with the documented default hyperparameters for `kind`.
BaseLearnerSpec default_spec(LearnerKind kind, std::uint64_t seed);

// Throws std::invalid_argument when params do not belong to kind.
void validate_spec(const BaseLearnerSpec& spec);

using LearnerModel = std::variant<CartModel, ForestModel, AdaBoostModel, GbmModel, XgbModel,
                                  KnnModel, LinearModel, MlpModel>;

// Fits the learner described by `spec` using `seed` (not spec.seed, so that
// callers can derive per-fold seeds).
LearnerModel fit_learner(const BaseLearnerSpec& spec, const Eigen::MatrixXd& features,
                         const Eigen::VectorXi& labels, std::uint64_t seed,
                         Parallelism parallelism = {});

ProbabilityPairs predict_proba(const LearnerModel& model, const Eigen::MatrixXd& rows);

}  // namespace stackml
