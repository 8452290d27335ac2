#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "stackml/baselines.hpp"
#include "stackml/error.hpp"

using namespace stackml;
using namespace stackml::testing;

namespace {

double accuracy(const ProbabilityPairs& p, const Eigen::VectorXi& y) {
  int hits = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) hits += (p(i, 1) >= 0.5 ? 1 : 0) == y(i);
  return static_cast<double>(hits) / static_cast<double>(y.size());
}

struct Line {
  Eigen::MatrixXd x;
  Eigen::VectorXi y;
};

Line separable_line() {
  Line l;
  l.x.resize(4, 1);
  l.x << -1, -2, 1, 2;
  l.y.resize(4);
  l.y << 0, 0, 1, 1;
  return l;
}


}  // namespace

TEST_CASE("knn") {
  SUBCASE("k = 1 on a training point returns its label") {
    const auto d = separable_fixture();
    const auto model = fit_knn(d.features, d.labels, KnnParams{1});
    const auto p = predict_proba(model, d.features);
    for (Eigen::Index i = 0; i < d.rows(); ++i) CHECK(p(i, 1) == d.labels(i));
  }
  SUBCASE("k = 3 with neighbour labels {1, 1, 0}") {
    Eigen::MatrixXd x(4, 1);
    x << 0.0, 1.0, 2.0, 10.0;
    Eigen::VectorXi y(4);
    y << 1, 1, 0, 0;
    const auto model = fit_knn(x, y, KnnParams{3});
    Eigen::MatrixXd q(1, 1);
    q << 0.9;
    CHECK(predict_proba(model, q)(0, 1) == doctest::Approx(2.0 / 3.0));
  }
  SUBCASE("all-negative training labels") {
    Rng rng(1);
    const auto d = random_fixture(rng, 15, 2);
    const auto model = fit_knn(d.features, Eigen::VectorXi::Zero(15), KnnParams{5});
    CHECK(predict_proba(model, d.features).col(1).isZero(0.0));
  }
  SUBCASE("distance ties go to the lower index") {
    Eigen::MatrixXd x(3, 1);
    x << -1, 1, 1;
    Eigen::VectorXi y(3);
    y << 1, 0, 1;
    const auto model = fit_knn(x, y, KnnParams{1});
    const Eigen::RowVectorXd q = Eigen::RowVectorXd::Zero(1);
    CHECK(nearest_neighbors(model, q, 3) == std::vector<int>{0, 1, 2});
  }
  SUBCASE("agrees with a full-sort oracle") {
    Rng rng(100);
    for (int trial = 0; trial < 100; ++trial) {
      const int n = 2 + static_cast<int>(rng.below(99));
      const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(n, 15))));
      const auto d = random_fixture(rng, n, 3, trial % 2 == 0 ? 4 : 0);
      const auto model = fit_knn(d.features, d.labels, KnnParams{k});
      const auto q = random_fixture(rng, 5, 3, trial % 2 == 0 ? 4 : 0);
      const auto p = predict_proba(model, q.features);
      for (int i = 0; i < 5; ++i) {
        CHECK(p(i, 1) == brute_force_knn(d.features, d.labels, q.features.row(i), k));
      }
    }
  }
  SUBCASE("errors") {
    const auto d = separable_fixture();
    CHECK_THROWS_AS(fit_knn(d.features, d.labels, KnnParams{21}), std::invalid_argument);
    const auto model = fit_knn(d.features, d.labels, KnnParams{3});
    CHECK_THROWS_AS(predict_proba(model, Eigen::MatrixXd::Zero(1, 3)), std::invalid_argument);
  }
}

TEST_CASE("logistic regression") {
  SUBCASE("separable line") {
    const auto l = separable_line();
    const auto model = fit_logistic_regression(l.x, l.y, LinearParams{500, 0.5, 0.0}, 0);
    CHECK(accuracy(predict_proba(model, l.x), l.y) == 1.0);
  }
  SUBCASE("mirror-symmetric data leaves the bias at zero") {
    Rng rng(2);
    Eigen::MatrixXd x(20, 2);
    Eigen::VectorXi y(20);
    for (int i = 0; i < 10; ++i) {
      x(i, 0) = rng.uniform() * 4 - 2;
      x(i, 1) = rng.uniform() * 4 - 2;
      y(i) = static_cast<int>(rng.below(2));
      x.row(i + 10) = -x.row(i);
      y(i + 10) = 1 - y(i);
    }
    y(0) = 0;
    y(10) = 1;
    const auto model = fit_logistic_regression(x, y, LinearParams{500, 0.1, 1e-4}, 0);
    CHECK(std::abs(model.bias) <= 1e-6);
  }
  SUBCASE("zero epochs") {
    const auto l = separable_line();
    const auto model = fit_logistic_regression(l.x, l.y, LinearParams{0, 0.1, 0.0}, 0);
    CHECK(model.weights.isZero(0.0));
    CHECK(model.bias == 0.0);
    CHECK((predict_proba(model, l.x).array() == 0.5).all());
  }
  SUBCASE("loss never increases at small step sizes") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
      const auto raw = random_fixture(rng, 60, 4);
      const auto d = Standardizer::fit(raw).transform(raw);
      std::vector<double> trace;
      fit_logistic_regression(d.features, d.labels,
                              LinearParams{200, 0.02 + 0.08 * rng.uniform(), 1e-3}, 0, &trace);
      for (std::size_t t = 1; t < trace.size(); ++t) CHECK(trace[t] <= trace[t - 1] + 1e-15);
    }
  }
  SUBCASE("single class is rejected") {
    const auto l = separable_line();
    CHECK_THROWS_AS(fit_logistic_regression(l.x, Eigen::VectorXi::Ones(4), LinearParams{}, 0),
                    DataShapeError);
  }
}

TEST_CASE("linear svc") {
  SUBCASE("separable line") {
    const auto l = separable_line();
    const auto model = fit_linear_svc(l.x, l.y, LinearParams{500, 0.1, 1e-3}, 0);
    CHECK(accuracy(predict_proba(model, l.x), l.y) == 1.0);
    const Eigen::VectorXd margin = decision_function(model, l.x);
    for (int i = 0; i < 4; ++i) CHECK((margin(i) > 0) == (l.y(i) == 1));
  }
  SUBCASE("zero epochs") {
    const auto l = separable_line();
    const auto model = fit_linear_svc(l.x, l.y, LinearParams{0, 0.1, 0.0}, 0);
    CHECK(decision_function(model, l.x).isZero(0.0));
    CHECK((predict_proba(model, l.x).array() == 0.5).all());
  }
  SUBCASE("doubling the features changes weights but not training predictions") {
    const auto l = separable_line();
    const LinearParams params{500, 0.1, 1e-3};
    const auto a = fit_linear_svc(l.x, l.y, params, 0);
    const auto b = fit_linear_svc(2.0 * l.x, l.y, params, 0);
    CHECK(a.weights(0) != b.weights(0));
    CHECK(((predict_proba(a, l.x).col(1).array() >= 0.5) ==
           (predict_proba(b, 2.0 * l.x).col(1).array() >= 0.5))
              .all());
  }
}

TEST_CASE("mlp") {
  SUBCASE("learns XOR") {
    const auto d = xor_fixture();
    const auto model = fit_mlp(d.features, d.labels, MlpParams{4, 5000, 0.5}, 0);
    CHECK(accuracy(predict_proba(model, d.features), d.labels) == 1.0);
  }
  SUBCASE("untrained network is deterministic and strictly inside (0, 1)") {
    const auto d = separable_fixture();
    const auto a = fit_mlp(d.features, d.labels, MlpParams{8, 0, 0.1}, 7);
    const auto b = fit_mlp(d.features, d.labels, MlpParams{8, 0, 0.1}, 7);
    CHECK(a == b);
    const auto p = predict_proba(a, d.features);
    CHECK((p.array() > 0.0).all());
    CHECK((p.array() < 1.0).all());
  }
  SUBCASE("initialisation bounds") {
    const auto model = init_mlp(9, MlpParams{5, 0, 0.1}, 3);
    CHECK(model.hidden_weights.cwiseAbs().maxCoeff() <= 1.0 / 3.0);
    CHECK(model.output_weights.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(5.0));
    CHECK(model.hidden_bias.isZero(0.0));
    CHECK(model.output_bias == 0.0);
  }
  SUBCASE("backpropagation matches central differences") {
    for (std::uint64_t seed : {1u, 2u, 3u}) CHECK(mlp_gradient_mismatch(seed) <= 1e-6);
    auto model = init_mlp(2, MlpParams{3, 0, 0.1}, 1);
    const auto d = xor_fixture();
    CHECK(mlp_loss_gradient(model, d.features, d.labels).loss ==
          doctest::Approx(mlp_loss(model, d.features, d.labels)).epsilon(1e-14));
  }
  SUBCASE("hidden size must be positive") {
    const auto d = xor_fixture();
    CHECK_THROWS_AS(fit_mlp(d.features, d.labels, MlpParams{0, 10, 0.1}, 0),
                    std::invalid_argument);
  }
}
