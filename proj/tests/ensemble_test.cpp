#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "stackml/ensemble.hpp"
#include "stackml/error.hpp"
#include "stackml/learner.hpp"

using namespace stackml;
using namespace stackml::testing;

namespace {

double training_accuracy(const ProbabilityPairs& p, const Eigen::VectorXi& y) {
  int hits = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) hits += (p(i, 1) >= 0.5 ? 1 : 0) == y(i);
  return static_cast<double>(hits) / static_cast<double>(y.size());
}

void check_normalized(const ProbabilityPairs& p) {
  CHECK((p.array() >= 0.0).all());
  CHECK((p.array() <= 1.0).all());
  CHECK(((p.col(0) + p.col(1)).array() - 1.0).abs().maxCoeff() <= 1e-12);
}

}  // namespace

TEST_CASE("single-tree forest equals CART") {
  Rng rng(606);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 4 + static_cast<int>(rng.below(47));
    const auto d = random_fixture(rng, n, 1 + static_cast<int>(rng.below(4)));
    ForestParams params;
    params.n_trees = 1;
    params.bootstrap = false;
    params.max_features = MaxFeatures::all();
    const auto forest = fit_random_forest(d.features, d.labels, params, trial);
    const auto cart = fit_cart(d.features, d.labels, CartParams{params.tree}, 5);
    CHECK(predict_proba(forest, d.features) == predict_proba(cart, d.features));
  }
}

TEST_CASE("random forest fits the separable fixture") {
  const auto d = separable_fixture();
  const auto forest = fit_random_forest(d.features, d.labels, ForestParams{}, 1);
  CHECK(forest.trees.size() == 100);
  const auto p = predict_proba(forest, d.features);
  CHECK(training_accuracy(p, d.labels) == 1.0);
  check_normalized(p);
}

TEST_CASE("more trees never lose training accuracy on the separable fixture") {
  const auto d = separable_fixture();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ForestParams one;
    one.n_trees = 1;
    ForestParams many;
    many.n_trees = 25;
    const double a1 = training_accuracy(
        predict_proba(fit_random_forest(d.features, d.labels, one, seed), d.features), d.labels);
    const double a25 = training_accuracy(
        predict_proba(fit_random_forest(d.features, d.labels, many, seed), d.features), d.labels);
    CHECK(a25 >= a1);
  }
}

TEST_CASE("forest fitting does not depend on the thread count") {
  Rng rng(5);
  const auto d = random_fixture(rng, 120, 5);
  ForestParams params;
  params.n_trees = 30;
  const auto serial = fit_random_forest(d.features, d.labels, params, 17, Parallelism{1});
  const auto threaded = fit_random_forest(d.features, d.labels, params, 17, Parallelism{4});
  CHECK(serial == threaded);
  const auto et1 = fit_extra_trees(d.features, d.labels, params, 17, Parallelism{1});
  const auto et4 = fit_extra_trees(d.features, d.labels, params, 17, Parallelism{4});
  CHECK(et1 == et4);
}

TEST_CASE("forest averages leaf distributions") {
  DecisionTree a;
  a.n_features = 1;
  a.nodes.resize(1);
  a.nodes[0].distribution = Eigen::Array2d(3, 0);
  DecisionTree b = a;
  b.nodes[0].distribution = Eigen::Array2d(2, 2);
  ForestModel forest;
  forest.trees = {a, b};
  const auto p = predict_proba(forest, Eigen::MatrixXd::Zero(1, 1));
  CHECK(p(0, 0) == 0.75);
  CHECK(p(0, 1) == 0.25);
}

TEST_CASE("forests reject single-class data") {
  const auto d = separable_fixture();
  const Eigen::VectorXi ones = Eigen::VectorXi::Ones(d.rows());
  CHECK_THROWS_AS(fit_random_forest(d.features, ones, ForestParams{}, 0), DataShapeError);
  CHECK_THROWS_AS(fit_extra_trees(d.features, ones, ForestParams{}, 0), DataShapeError);
}

TEST_CASE("extra trees") {
  const auto d = separable_fixture();
  SUBCASE("separable fixture with 25 trees") {
    ForestParams params;
    params.n_trees = 25;
    const auto model = fit_extra_trees(d.features, d.labels, params, 3);
    for (const auto& t : model.trees) CHECK(t.nodes.size() > 1);
    CHECK(training_accuracy(predict_proba(model, d.features), d.labels) == 1.0);
    check_normalized(predict_proba(model, d.features));
  }
  SUBCASE("single forced feature is reproducible") {
    ForestParams params;
    params.n_trees = 1;
    params.max_features = MaxFeatures::fixed(1);
    const auto a = fit_extra_trees(d.features, d.labels, params, 123);
    const auto b = fit_extra_trees(d.features, d.labels, params, 123);
    CHECK(a == b);
    CHECK_FALSE(a.params.bootstrap);
  }
  SUBCASE("thresholds are drawn, not optimised") {
    ForestParams params;
    params.n_trees = 1;
    params.max_features = MaxFeatures::all();
    const auto et = fit_extra_trees(d.features, d.labels, params, 8);
    const auto rf = fit_random_forest(d.features, d.labels,
                                      ForestParams{1, MaxFeatures::all(), false, {}}, 8);
    CHECK(et.trees[0].nodes[0].threshold != rf.trees[0].nodes[0].threshold);
  }
}

TEST_CASE("adaboost") {
  SUBCASE("a perfect stump ends boosting after one stage") {
    Eigen::MatrixXd x(4, 1);
    x << 0, 1, 2, 3;
    Eigen::VectorXi y(4);
    y << 0, 0, 1, 1;
    const auto model = fit_adaboost(x, y, AdaBoostParams{}, 0);
    REQUIRE(model.stumps.size() == 1);
    CHECK(model.alphas[0] ==
          doctest::Approx(0.5 * std::log((1 - kAdaBoostMinError) / kAdaBoostMinError)));
    CHECK(training_accuracy(predict_proba(model, x), y) == 1.0);
  }
  SUBCASE("error of exactly one half halts before adding the stage") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Zero(4, 1);
    Eigen::VectorXi y(4);
    y << 0, 1, 0, 1;
    std::vector<AdaBoostStage> trace;
    const auto model = fit_adaboost(x, y, AdaBoostParams{}, 0, &trace);
    CHECK(model.stumps.empty());
    REQUIRE(trace.size() == 1);
    CHECK(trace[0].error == 0.5);
    CHECK_FALSE(trace[0].accepted);
    CHECK(predict_proba(model, x)(0, 1) == 0.5);
  }
  SUBCASE("first round on a five-point line") {
    // Sorted: 0(-) 0.5(+) 1(-) 2(+) 3(+). Gini gains of the four midpoints are
    // 0.18, 0.0133, 0.2133, 0.08, so the stump splits at 1.5 and misclassifies
    // the row at 0.5: error 1/5, alpha = 0.5 ln 4.
    Eigen::MatrixXd x(5, 1);
    x << 0, 1, 2, 3, 0.5;
    Eigen::VectorXi y(5);
    y << 0, 0, 1, 1, 1;
    std::vector<AdaBoostStage> trace;
    AdaBoostParams params;
    params.n_stages = 1;
    const auto model = fit_adaboost(x, y, params, 0, &trace);
    REQUIRE(model.stumps.size() == 1);
    CHECK(model.stumps[0].nodes[0].threshold == 1.5);
    CHECK(trace[0].error == doctest::Approx(0.2));
    CHECK(model.alphas[0] == doctest::Approx(0.5 * std::log(4.0)));
    CHECK(model.alphas[0] == doctest::Approx(0.6931).epsilon(1e-4));
  }
  SUBCASE("weight law after every stage") {
    Rng rng(42);
    for (int trial = 0; trial < 10; ++trial) {
      const auto d = random_fixture(rng, 60, 3);
      std::vector<AdaBoostStage> trace;
      AdaBoostParams params;
      params.n_stages = 20;
      fit_adaboost(d.features, d.labels, params, trial, &trace);
      for (const auto& stage : trace) {
        if (!stage.accepted || stage.weights_after.size() == 0) continue;
        CHECK(std::abs(stage.weights_after.sum() - 1.0) <= 1e-12);
        if (stage.error > 0.0 && stage.error < 0.5) {
          for (Eigen::Index i = 0; i < stage.weights_before.size(); ++i) {
            if (stage.misclassified[static_cast<std::size_t>(i)]) {
              CHECK(stage.weights_unnormalized(i) > stage.weights_before(i));
            }
          }
        }
      }
    }
  }
  SUBCASE("one stage voting +1 gives P(1) = 1") {
    AdaBoostModel model;
    DecisionTree stump;
    stump.n_features = 1;
    stump.nodes.resize(1);
    stump.nodes[0].distribution = Eigen::Array2d(0, 4);
    model.stumps = {stump};
    model.alphas = {0.7};
    CHECK(predict_proba(model, Eigen::MatrixXd::Zero(2, 1))(1, 1) == 1.0);
  }
}

TEST_CASE("gbm") {
  SUBCASE("prior log-odds") {
    Eigen::VectorXi y(4);
    y << 1, 1, 1, 0;
    CHECK(prior_log_odds(y) == doctest::Approx(1.098612).epsilon(1e-6));
  }
  SUBCASE("zero stages predict the prior") {
    Eigen::MatrixXd x(4, 1);
    x << 0, 1, 2, 3;
    Eigen::VectorXi y(4);
    y << 1, 1, 1, 0;
    GbmParams params;
    params.n_stages = 0;
    const auto model = fit_gbm(x, y, params, 0);
    const auto p = predict_proba(model, x);
    for (int i = 0; i < 4; ++i) CHECK(p(i, 1) == doctest::Approx(0.75));
    Eigen::VectorXi balanced(4);
    balanced << 1, 0, 1, 0;
    CHECK(predict_proba(fit_gbm(x, balanced, params, 0), x)(2, 1) == 0.5);
  }
  SUBCASE("training loss does not increase on the separable fixture") {
    const auto d = separable_fixture();
    GbmParams params;
    params.learning_rate = 0.1;
    std::vector<double> trace;
    const auto model = fit_gbm(d.features, d.labels, params, 0, &trace);
    REQUIRE(trace.size() == 100);
    for (std::size_t t = 1; t < trace.size(); ++t) CHECK(trace[t] <= trace[t - 1] + 1e-15);
    CHECK(training_accuracy(predict_proba(model, d.features), d.labels) == 1.0);
  }
  SUBCASE("Newton leaves") {
    // One stage, one leaf: value = sum(y - p) / sum(p (1 - p)) at p = prior.
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(4, 1);
    Eigen::VectorXi y(4);
    y << 1, 1, 1, 0;
    GbmParams params;
    params.n_stages = 1;
    const auto model = fit_gbm(x, y, params, 0);
    REQUIRE(model.stages[0].nodes.size() == 1);
    CHECK(model.stages[0].nodes[0].value == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("xgb") {
  Rng rng(12);
  const auto d = random_fixture(rng, 80, 3);
  SUBCASE("huge gamma leaves every stage a single leaf") {
    XgbParams params;
    params.gamma = 1e9;
    params.n_stages = 10;
    for (const auto& t : fit_xgb(d.features, d.labels, params, 0).stages) {
      CHECK(t.nodes.size() == 1);
    }
  }
  SUBCASE("huge lambda shrinks to the prior") {
    XgbParams params;
    params.lambda = 1e12;
    const auto model = fit_xgb(d.features, d.labels, params, 0);
    const auto p = predict_proba(model, d.features);
    const double prior = sigmoid(prior_log_odds(d.labels));
    CHECK((p.col(1).array() - prior).abs().maxCoeff() < 1e-9);
  }
  SUBCASE("leaf weight law") {
    XgbParams params;
    params.n_stages = 20;
    params.lambda = 0.7;
    const auto model = fit_xgb(d.features, d.labels, params, 0);
    for (const auto& tree : model.stages) {
      for (const auto& node : tree.nodes) {
        if (!node.is_leaf()) continue;
        CHECK(node.value == -node.gradient_sum / (node.hessian_sum + params.lambda));
      }
    }
    check_normalized(predict_proba(model, d.features));
  }
  SUBCASE("negative lambda is rejected") {
    XgbParams params;
    params.lambda = -1.0;
    CHECK_THROWS_AS(fit_xgb(d.features, d.labels, params, 0), std::invalid_argument);
  }
}

TEST_CASE("every ensemble emits normalized probabilities") {
  Rng rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const auto d = random_fixture(rng, 50, 4);
    ForestParams fp;
    fp.n_trees = 10;
    check_normalized(predict_proba(fit_random_forest(d.features, d.labels, fp, trial), d.features));
    check_normalized(predict_proba(fit_extra_trees(d.features, d.labels, fp, trial), d.features));
    check_normalized(
        predict_proba(fit_adaboost(d.features, d.labels, AdaBoostParams{}, trial), d.features));
    check_normalized(predict_proba(fit_gbm(d.features, d.labels, GbmParams{}, trial), d.features));
    check_normalized(predict_proba(fit_xgb(d.features, d.labels, XgbParams{}, trial), d.features));
  }
}
