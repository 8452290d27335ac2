#include "stackml/learner.hpp"

#include <array>
#include <stdexcept>

namespace stackml {

namespace {

constexpr std::array<std::string_view, 9> kNames = {"RF",  "MLP", "KNN",  "ETC", "XGB",
                                                    "SVC", "ADB", "CART", "GBM"};

}  // namespace

std::string_view learner_name(LearnerKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

std::optional<LearnerKind> parse_learner_name(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<LearnerKind>(i);
  }
  return std::nullopt;
}

const std::vector<LearnerKind>& default_roster() {
  static const std::vector<LearnerKind> roster = {
      LearnerKind::RF,  LearnerKind::MLP, LearnerKind::KNN,  LearnerKind::ETC, LearnerKind::XGB,
      LearnerKind::SVC, LearnerKind::ADB, LearnerKind::CART, LearnerKind::GBM};
  return roster;
}

CartModel fit_cart(const Eigen::MatrixXd& features, const Eigen::VectorXi& labels,
                   const CartParams& params, std::uint64_t seed) {
  require_both_classes(labels, "cart");
  TreeConfig config = params.tree;
  config.seed = seed;
  return CartModel{params, fit_tree(features, ClassTargets{labels, 2}, config)};
}

ProbabilityPairs predict_proba(const CartModel& model, const Eigen::MatrixXd& rows) {
  if (model.tree.nodes.empty()) throw std::logic_error("cart model is not fitted");
  return to_pairs(tree_predict_positive(model.tree, rows));
}

BaseLearnerSpec default_spec(LearnerKind kind, std::uint64_t seed) {
  BaseLearnerSpec spec;
  spec.kind = kind;
  spec.seed = seed;
  switch (kind) {
    case LearnerKind::RF:
      spec.params = ForestParams{};
      break;
    case LearnerKind::ETC: {
      ForestParams p;
      p.bootstrap = false;
      spec.params = p;
      break;
    }
    case LearnerKind::MLP:
      spec.params = MlpParams{};
      break;
    case LearnerKind::KNN:
      spec.params = KnnParams{};
      break;
    case LearnerKind::XGB:
      spec.params = XgbParams{};
      break;
    case LearnerKind::SVC:
      spec.params = LinearParams{500, 0.1, 1e-3};
      break;
    case LearnerKind::ADB:
      spec.params = AdaBoostParams{};
      break;
    case LearnerKind::CART:
      spec.params = CartParams{};
      break;
    case LearnerKind::GBM:
      spec.params = GbmParams{};
      break;
  }
  return spec;
}

void validate_spec(const BaseLearnerSpec& spec) {
  bool ok = false;
  switch (spec.kind) {
    case LearnerKind::RF:
    case LearnerKind::ETC:
      ok = std::holds_alternative<ForestParams>(spec.params);
      break;
    case LearnerKind::MLP:
      ok = std::holds_alternative<MlpParams>(spec.params);
      break;
    case LearnerKind::KNN:
      ok = std::holds_alternative<KnnParams>(spec.params);
      break;
    case LearnerKind::XGB:
      ok = std::holds_alternative<XgbParams>(spec.params);
      break;
    case LearnerKind::SVC:
      ok = std::holds_alternative<LinearParams>(spec.params);
      break;
    case LearnerKind::ADB:
      ok = std::holds_alternative<AdaBoostParams>(spec.params);
      break;
    case LearnerKind::CART:
      ok = std::holds_alternative<CartParams>(spec.params);
      break;
    case LearnerKind::GBM:
      ok = std::holds_alternative<GbmParams>(spec.params);
      break;
  }
  if (!ok) throw std::invalid_argument("hyperparameters do not match learner " + spec.name());
}

LearnerModel fit_learner(const BaseLearnerSpec& spec, const Eigen::MatrixXd& features,
                         const Eigen::VectorXi& labels, std::uint64_t seed,
                         Parallelism parallelism) {
  validate_spec(spec);
  switch (spec.kind) {
    case LearnerKind::RF:
      return fit_random_forest(features, labels, std::get<ForestParams>(spec.params), seed,
                               parallelism);
    case LearnerKind::ETC:
      return fit_extra_trees(features, labels, std::get<ForestParams>(spec.params), seed,
                             parallelism);
    case LearnerKind::MLP:
      return fit_mlp(features, labels, std::get<MlpParams>(spec.params), seed);
    case LearnerKind::KNN:
      require_both_classes(labels, "knn");
      return fit_knn(features, labels, std::get<KnnParams>(spec.params));
    case LearnerKind::XGB:
      return fit_xgb(features, labels, std::get<XgbParams>(spec.params), seed);
    case LearnerKind::SVC:
      return fit_linear_svc(features, labels, std::get<LinearParams>(spec.params), seed);
    case LearnerKind::ADB:
      return fit_adaboost(features, labels, std::get<AdaBoostParams>(spec.params), seed);
    case LearnerKind::CART:
      return fit_cart(features, labels, std::get<CartParams>(spec.params), seed);
    case LearnerKind::GBM:
      return fit_gbm(features, labels, std::get<GbmParams>(spec.params), seed);
  }
  throw std::logic_error("unknown learner kind");
}

ProbabilityPairs predict_proba(const LearnerModel& model, const Eigen::MatrixXd& rows) {
  return std::visit([&](const auto& m) { return predict_proba(m, rows); }, model);
}

}  // namespace stackml
