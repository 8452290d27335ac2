#include "doctest.h"

#include <cmath>

#include "fixtures.hpp"
#include "stackml/tree.hpp"
#include "tree_oracle.hpp"

using namespace stackml;
using namespace stackml::testing;

namespace {

ClassDistribution dist(double a, double b) { return ClassDistribution{Eigen::Array2d(a, b)}; }

std::vector<int> all_features(int d) {
  std::vector<int> f(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) f[static_cast<std::size_t>(j)] = j;
  return f;
}

// Node indices visited by every row.
std::vector<std::vector<int>> routes(const DecisionTree& tree, const Eigen::MatrixXd& x) {
  std::vector<std::vector<int>> out;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    std::vector<int> path{0};
    int node = 0;
    while (!tree.nodes[static_cast<std::size_t>(node)].is_leaf()) {
      const auto& n = tree.nodes[static_cast<std::size_t>(node)];
      node = x(i, n.feature) <= n.threshold ? n.left : n.right;
      path.push_back(node);
    }
    out.push_back(path);
  }
  return out;
}

}  // namespace

TEST_CASE("gini impurity") {
  CHECK(gini_impurity(dist(0.5, 0.5)) == doctest::Approx(0.5));
  CHECK(gini_impurity(dist(1, 0)) == 0.0);
  CHECK(gini_impurity(dist(0.25, 0.75)) == doctest::Approx(0.375));
  CHECK(gini_impurity(dist(3, 9)) == doctest::Approx(0.375));
  CHECK_THROWS_AS(gini_impurity(dist(0, 0)), std::invalid_argument);
}

TEST_CASE("entropy") {
  CHECK(entropy(dist(0.5, 0.5)) == doctest::Approx(1.0));
  CHECK(entropy(dist(1, 0)) == 0.0);
  // -0.25 log2 0.25 - 0.75 log2 0.75
  CHECK(entropy(dist(0.25, 0.75)) == doctest::Approx(0.811278).epsilon(1e-6));
  CHECK_THROWS_AS(entropy(dist(0, 0)), std::invalid_argument);
}

TEST_CASE("impurity bounds over random binary distributions") {
  Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    const auto d = dist(rng.uniform(), rng.uniform() + 1e-9);
    const double g = gini_impurity(d);
    const double h = entropy(d);
    CHECK(g >= 0.0);
    CHECK(g <= 0.5 + 1e-15);
    CHECK(h >= 0.0);
    CHECK(h <= 1.0 + 1e-15);
  }
}

TEST_CASE("best_split on a threshold-separable line") {
  Eigen::MatrixXd x(4, 1);
  x << 0, 1, 2, 3;
  Eigen::VectorXi y(4);
  y << 0, 0, 1, 1;
  const auto split =
      best_split(x, ClassTargets{y, 2}, Eigen::VectorXd::Ones(4), {0}, TreeConfig{});
  REQUIRE(split);
  CHECK(split->feature == 0);
  CHECK(split->threshold == 1.5);
  CHECK(split->gain == doctest::Approx(0.5));
  CHECK(split->left_count == 2);
}

TEST_CASE("best_split on a constant feature is absent") {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(5, 1, 3.0);
  Eigen::VectorXi y(5);
  y << 0, 1, 0, 1, 1;
  CHECK_FALSE(best_split(x, ClassTargets{y, 2}, Eigen::VectorXd::Ones(5), {0}, TreeConfig{}));
}

TEST_CASE("zero-weight rows do not influence best_split") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto d = random_fixture(rng, 12, 2);
    Eigen::VectorXd w = Eigen::VectorXd::Ones(12);
    const int drop = static_cast<int>(rng.below(12));
    w(drop) = 0.0;
    std::vector<int> keep;
    for (int i = 0; i < 12; ++i) {
      if (i != drop) keep.push_back(i);
    }
    const auto reduced = d.subset(keep);
    const auto a = best_split(d.features, ClassTargets{d.labels, 2}, w, {0, 1}, TreeConfig{});
    const auto b = best_split(reduced.features, ClassTargets{reduced.labels, 2},
                              Eigen::VectorXd::Ones(11), {0, 1}, TreeConfig{});
    REQUIRE(a.has_value() == b.has_value());
    if (a) {
      CHECK(a->feature == b->feature);
      CHECK(a->threshold == b->threshold);
      CHECK(a->gain == b->gain);
    }
  }
}

TEST_CASE("best_split honours min_samples_leaf") {
  Eigen::MatrixXd x(5, 1);
  x << 0, 1, 2, 3, 4;
  Eigen::VectorXi y(5);
  y << 0, 1, 1, 1, 1;
  TreeConfig config;
  config.min_samples_leaf = 2;
  const auto split = best_split(x, ClassTargets{y, 2}, Eigen::VectorXd::Ones(5), {0}, config);
  REQUIRE(split);
  CHECK(split->left_count >= 2);
  CHECK(split->right_count >= 2);
  CHECK(split->threshold == 1.5);
}

TEST_CASE("root split agrees with exhaustive enumeration") {
  Rng rng(2718);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(7));
    const int d = 1 + static_cast<int>(rng.below(2));
    const auto data = random_fixture(rng, n, d, 5);
    const auto oracle = enumerate_gini_splits(data.features, data.labels);
    const auto split = best_split(data.features, ClassTargets{data.labels, 2},
                                  Eigen::VectorXd::Ones(n), all_features(d), TreeConfig{});
    double best = 0.0;
    for (const auto& c : oracle) best = std::max(best, c.gain);
    if (best <= kMinSplitGain) {
      CHECK_FALSE(split);
      continue;
    }
    REQUIRE(split);
    CHECK(split->gain == doctest::Approx(best).epsilon(1e-12));
    // Lowest feature, then smallest threshold, among the maximisers.
    const OracleSplit* first = nullptr;
    for (const auto& c : oracle) {
      if (std::abs(c.gain - best) <= 1e-12 && !first) first = &c;
    }
    CHECK(split->feature == first->feature);
    CHECK(split->threshold == first->threshold);
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("fit_tree reaches perfect training accuracy on XOR") {
  const auto d = xor_fixture();
  TreeConfig config;
  config.max_depth = 2;
  const auto tree = fit_tree(d.features, ClassTargets{d.labels, 2}, config);
  CHECK(tree.depth() <= 2);
  for (int i = 0; i < 4; ++i) {
    const auto p = tree_predict_distribution(tree, d.features.row(i));
    CHECK(p(d.labels(i)) == 1.0);
  }
  const Eigen::RowVector2d q(0, 1);
  CHECK(tree_predict_distribution(tree, q)(1) == 1.0);
}

TEST_CASE("fit_tree on a single class is one leaf") {
  Rng rng(8);
  const auto d = random_fixture(rng, 10, 3);
  const Eigen::VectorXi y = Eigen::VectorXi::Zero(10);
  const auto tree = fit_tree(d.features, ClassTargets{y, 2}, TreeConfig{});
  REQUIRE(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].is_leaf());
  const auto p = tree_predict_distribution(tree, d.features.row(3));
  CHECK(p(0) == 1.0);
  CHECK(p(1) == 0.0);
}

TEST_CASE("fit_tree splits the separable line at 1.5 into pure leaves") {
  Eigen::MatrixXd x(4, 1);
  x << 0, 1, 2, 3;
  Eigen::VectorXi y(4);
  y << 0, 0, 1, 1;
  const auto tree = fit_tree(x, ClassTargets{y, 2}, TreeConfig{});
  REQUIRE(tree.nodes.size() == 3);
  CHECK(tree.nodes[0].threshold == 1.5);
  CHECK(tree.nodes[1].is_leaf());
  CHECK(tree.nodes[2].is_leaf());
  CHECK(gini_impurity({tree.nodes[1].distribution}) == 0.0);
  CHECK(gini_impurity({tree.nodes[2].distribution}) == 0.0);
}

TEST_CASE("regression trees") {
  SUBCASE("single leaf holds the mean") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(4, 1);
    Eigen::VectorXd t(4);
    t << 0, 0, 0, 1;
    TreeConfig config;
    config.criterion = SplitCriterion::variance;
    const auto tree = fit_tree(x, RegressionTargets{t}, config);
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree_predict_value(tree, x.row(0)) == 0.25);
  }
  SUBCASE("step function is recovered") {
    Eigen::MatrixXd x(6, 1);
    x << 1, 2, 3, 4, 5, 6;
    Eigen::VectorXd t(6);
    t << 2, 2, 2, 7, 7, 7;
    TreeConfig config;
    config.criterion = SplitCriterion::variance;
    const auto tree = fit_tree(x, RegressionTargets{t}, config);
    CHECK(tree.nodes[0].threshold == 3.5);
    CHECK(tree_predict_value(tree, x.row(0)) == 2.0);
    CHECK(tree_predict_value(tree, x.row(5)) == 7.0);
  }
  SUBCASE("second-order leaves store -G / (H + lambda)") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(4, 1);
    Eigen::VectorXd g(4);
    g << -0.25, -0.25, -0.25, -0.25;
    Eigen::VectorXd h = Eigen::VectorXd::Constant(4, 0.0625);
    TreeConfig config;
    config.criterion = SplitCriterion::second_order;
    config.l2_regularization = 1.0;
    const auto tree = fit_tree(x, GradientTargets{g, h}, config);
    REQUIRE(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].gradient_sum == -1.0);
    CHECK(tree.nodes[0].hessian_sum == 0.25);
    CHECK(tree.nodes[0].value == doctest::Approx(0.8));
  }
  SUBCASE("criterion must match targets") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(2, 1);
    Eigen::VectorXd t = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(fit_tree(x, RegressionTargets{t}, TreeConfig{}), std::invalid_argument);
  }
}

TEST_CASE("tree prediction checks the row width") {
  const auto d = xor_fixture();
  const auto tree = fit_tree(d.features, ClassTargets{d.labels, 2}, TreeConfig{});
  const Eigen::RowVector3d wide(0, 0, 0);
  CHECK_THROWS_AS(tree_predict_distribution(tree, wide), std::invalid_argument);
  CHECK_THROWS_AS(fit_tree(Eigen::MatrixXd(0, 2), ClassTargets{Eigen::VectorXi(0), 2},
                           TreeConfig{}),
                  std::invalid_argument);
}

TEST_CASE("fitted trees respect depth and leaf-size limits") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = random_fixture(rng, 80, 3);
    TreeConfig config;
    config.max_depth = 1 + static_cast<int>(rng.below(5));
    config.min_samples_leaf = 1 + static_cast<int>(rng.below(6));
    config.min_samples_split = 2 + static_cast<int>(rng.below(10));
    const auto tree = fit_tree(d.features, ClassTargets{d.labels, 2}, config);
    CHECK(tree.depth() <= *config.max_depth);
    std::vector<int> leaf_rows(tree.nodes.size(), 0);
    for (int i = 0; i < 80; ++i) ++leaf_rows[static_cast<std::size_t>(leaf_index(tree, d.features.row(i)))];
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
      if (tree.nodes[k].is_leaf()) {
        CHECK(leaf_rows[k] >= config.min_samples_leaf);
        CHECK(tree.nodes[k].distribution.allFinite());
      } else {
        CHECK(tree.nodes[k].left > 0);
        CHECK(tree.nodes[k].right > 0);
      }
    }
  }
}

TEST_CASE("accepted splits never increase weighted impurity") {
  Rng rng(57);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = random_fixture(rng, 60, 3);
    for (const auto criterion : {SplitCriterion::gini, SplitCriterion::entropy}) {
      TreeConfig config;
      config.criterion = criterion;
      const auto tree = fit_tree(d.features, ClassTargets{d.labels, 2}, config);
      // Rebuild node class weights from the training rows.
      std::vector<Eigen::Array2d> counts(tree.nodes.size(), Eigen::Array2d::Zero());
      for (int i = 0; i < 60; ++i) {
        int node = 0;
        for (;;) {
          counts[static_cast<std::size_t>(node)](d.labels(i)) += 1;
          const auto& n = tree.nodes[static_cast<std::size_t>(node)];
          if (n.is_leaf()) break;
          node = d.features(i, n.feature) <= n.threshold ? n.left : n.right;
        }
      }
      const auto imp = [&](const Eigen::Array2d& c) {
        const ClassDistribution cd{c};
        return criterion == SplitCriterion::gini ? gini_impurity(cd) : entropy(cd);
      };
      for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
        const auto& n = tree.nodes[k];
        if (n.is_leaf()) continue;
        const auto& l = counts[static_cast<std::size_t>(n.left)];
        const auto& r = counts[static_cast<std::size_t>(n.right)];
        const double total = counts[k].sum();
        const double children = l.sum() / total * imp(l) + r.sum() / total * imp(r);
        CHECK(children <= imp(counts[k]) + 1e-12);
      }
    }
  }
}

TEST_CASE("routing is invariant under a monotone feature transform") {
  Rng rng(91);
  for (int trial = 0; trial < 20; ++trial) {
    const auto d = random_fixture(rng, 40, 3);
    Eigen::MatrixXd warped = d.features;
    const int f = static_cast<int>(rng.below(3));
    warped.col(f) = warped.col(f).array().exp() * 3.0 + 1.0;
    const auto a = fit_tree(d.features, ClassTargets{d.labels, 2}, TreeConfig{});
    const auto b = fit_tree(warped, ClassTargets{d.labels, 2}, TreeConfig{});
    CHECK(routes(a, d.features) == routes(b, warped));
  }
}

TEST_CASE("identical inputs give identical trees") {
  Rng rng(13);
  const auto d = random_fixture(rng, 100, 5);
  TreeConfig config;
  config.max_features = MaxFeatures::sqrt();
  config.threshold_mode = ThresholdMode::random;
  config.seed = 99;
  const auto a = fit_tree(d.features, ClassTargets{d.labels, 2}, config);
  const auto b = fit_tree(d.features, ClassTargets{d.labels, 2}, config);
  CHECK(a == b);
  config.seed = 100;
  CHECK_FALSE(a == fit_tree(d.features, ClassTargets{d.labels, 2}, config));
}

TEST_CASE("max_features resolution") {
  CHECK(MaxFeatures::all().resolve(11) == 11);
  CHECK(MaxFeatures::sqrt().resolve(11) == 3);
  CHECK(MaxFeatures::sqrt().resolve(1) == 1);
  CHECK(MaxFeatures::fixed(20).resolve(11) == 11);
  CHECK(MaxFeatures::fixed(0).resolve(11) == 1);
}
