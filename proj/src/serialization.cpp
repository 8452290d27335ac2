#include "stackml/serialization.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "stackml/error.hpp"

namespace stackml {

using Json = nlohmann::ordered_json;

namespace {

[[noreturn]] void corrupt(const std::string& what) {
  throw ModelFileError("inconsistent model file: " + what);
}

double real_of(const Json& j) {
  if (!j.is_number()) corrupt("expected a number, found " + j.dump());
  return j.get<double>();
}

Json real_json(double v) {
  if (!std::isfinite(v)) throw ModelFileError("cannot serialize non-finite value");
  return v;
}

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(real_json(v(i)));
  return out;
}

Eigen::VectorXd vector_of(const Json& j) {
  if (!j.is_array()) corrupt("expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = real_of(j[i]);
  return v;
}

Json int_vector_json(const Eigen::VectorXi& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXi int_vector_of(const Json& j) {
  const auto values = j.get<std::vector<int>>();
  return Eigen::Map<const Eigen::VectorXi>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json data = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) data.push_back(real_json(m(i, k)));
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_of(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols)) {
    corrupt("matrix size does not match its data");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t p = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = real_of(data[p++]);
  }
  return m;
}

template <typename Enum>
struct EnumNames;

template <>
struct EnumNames<SplitCriterion> {
  static constexpr std::array<std::pair<SplitCriterion, const char*>, 4> table{{
      {SplitCriterion::gini, "gini"},
      {SplitCriterion::entropy, "entropy"},
      {SplitCriterion::variance, "variance"},
      {SplitCriterion::second_order, "second_order"},
  }};
};
template <>
struct EnumNames<ThresholdMode> {
  static constexpr std::array<std::pair<ThresholdMode, const char*>, 2> table{{
      {ThresholdMode::best, "best"},
      {ThresholdMode::random, "random"},
  }};
};
template <>
struct EnumNames<MaxFeatures::Kind> {
  static constexpr std::array<std::pair<MaxFeatures::Kind, const char*>, 3> table{{
      {MaxFeatures::Kind::all, "all"},
      {MaxFeatures::Kind::sqrt, "sqrt"},
      {MaxFeatures::Kind::count, "count"},
  }};
};
template <>
struct EnumNames<TreeMode> {
  static constexpr std::array<std::pair<TreeMode, const char*>, 2> table{{
      {TreeMode::classification, "classification"},
      {TreeMode::regression, "regression"},
  }};
};
template <>
struct EnumNames<ForestKind> {
  static constexpr std::array<std::pair<ForestKind, const char*>, 2> table{{
      {ForestKind::random_forest, "random_forest"},
      {ForestKind::extra_trees, "extra_trees"},
  }};
};
template <>
struct EnumNames<LinearKind> {
  static constexpr std::array<std::pair<LinearKind, const char*>, 2> table{{
      {LinearKind::logistic, "logistic"},
      {LinearKind::svc, "svc"},
  }};
};
template <>
struct EnumNames<ColumnKind> {
  static constexpr std::array<std::pair<ColumnKind, const char*>, 2> table{{
      {ColumnKind::numeric, "numeric"},
      {ColumnKind::nominal, "nominal"},
  }};
};

template <typename Enum>
Json enum_json(Enum value) {
  for (const auto& [v, name] : EnumNames<Enum>::table) {
    if (v == value) return name;
  }
  throw ModelFileError("unknown enumerator");
}

template <typename Enum>
Enum enum_of(const Json& j) {
  const auto text = j.get<std::string>();
  for (const auto& [v, name] : EnumNames<Enum>::table) {
    if (text == name) return v;
  }
  corrupt("unknown value '" + text + "'");
}

// ---- trees -----------------------------------------------------------------

Json tree_config_json(const TreeConfig& c) {
  return Json{{"criterion", enum_json(c.criterion)},
              {"max_depth", c.max_depth ? Json(*c.max_depth) : Json(nullptr)},
              {"min_samples_split", c.min_samples_split},
              {"min_samples_leaf", c.min_samples_leaf},
              {"max_features", Json{{"kind", enum_json(c.max_features.kind)},
                                    {"count", c.max_features.count}}},
              {"threshold_mode", enum_json(c.threshold_mode)},
              {"seed", c.seed},
              {"l2_regularization", real_json(c.l2_regularization)},
              {"split_penalty", real_json(c.split_penalty)}};
}

TreeConfig tree_config_of(const Json& j) {
  TreeConfig c;
  c.criterion = enum_of<SplitCriterion>(j.at("criterion"));
  if (!j.at("max_depth").is_null()) c.max_depth = j.at("max_depth").get<int>();
  c.min_samples_split = j.at("min_samples_split").get<int>();
  c.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  c.max_features.kind = enum_of<MaxFeatures::Kind>(j.at("max_features").at("kind"));
  c.max_features.count = j.at("max_features").at("count").get<int>();
  c.threshold_mode = enum_of<ThresholdMode>(j.at("threshold_mode"));
  c.seed = j.at("seed").get<std::uint64_t>();
  c.l2_regularization = real_of(j.at("l2_regularization"));
  c.split_penalty = real_of(j.at("split_penalty"));
  return c;
}

// Nodes are written as flat arrays:
// [feature, threshold, left, right, depth, value, gradient_sum, hessian_sum, [distribution]]
Json tree_json(const DecisionTree& t) {
  Json nodes = Json::array();
  for (const auto& n : t.nodes) {
    Json dist = Json::array();
    for (Eigen::Index c = 0; c < n.distribution.size(); ++c) dist.push_back(real_json(n.distribution(c)));
    nodes.push_back(Json::array({n.feature, real_json(n.threshold), n.left, n.right, n.depth,
                                 real_json(n.value), real_json(n.gradient_sum),
                                 real_json(n.hessian_sum), std::move(dist)}));
  }
  return Json{{"mode", enum_json(t.mode)},
              {"criterion", enum_json(t.criterion)},
              {"n_features", t.n_features},
              {"n_classes", t.n_classes},
              {"nodes", std::move(nodes)}};
}

DecisionTree tree_of(const Json& j) {
  DecisionTree t;
  t.mode = enum_of<TreeMode>(j.at("mode"));
  t.criterion = enum_of<SplitCriterion>(j.at("criterion"));
  t.n_features = j.at("n_features").get<int>();
  t.n_classes = j.at("n_classes").get<int>();
  const auto& nodes = j.at("nodes");
  if (!nodes.is_array() || nodes.empty()) corrupt("tree without nodes");
  const int count = static_cast<int>(nodes.size());
  for (int i = 0; i < count; ++i) {
    const auto& a = nodes[static_cast<std::size_t>(i)];
    if (!a.is_array() || a.size() != 9) corrupt("malformed tree node");
    TreeNode n;
    n.feature = a[0].get<int>();
    n.threshold = real_of(a[1]);
    n.left = a[2].get<int>();
    n.right = a[3].get<int>();
    n.depth = a[4].get<int>();
    n.value = real_of(a[5]);
    n.gradient_sum = real_of(a[6]);
    n.hessian_sum = real_of(a[7]);
    n.distribution = vector_of(a[8]).array();
    if (n.feature >= t.n_features ||
        (n.feature >= 0 && (n.left <= i || n.right <= i || n.left >= count || n.right >= count))) {
      corrupt("tree node " + std::to_string(i) + " has invalid links");
    }
    if (t.mode == TreeMode::classification && n.is_leaf() &&
        n.distribution.size() != t.n_classes) {
      corrupt("leaf distribution has the wrong length");
    }
    t.nodes.push_back(std::move(n));
  }
  return t;
}

Json trees_json(const std::vector<DecisionTree>& trees) {
  Json out = Json::array();
  for (const auto& t : trees) out.push_back(tree_json(t));
  return out;
}

std::vector<DecisionTree> trees_of(const Json& j, int n_features) {
  std::vector<DecisionTree> out;
  for (const auto& t : j) {
    out.push_back(tree_of(t));
    if (out.back().n_features != n_features) corrupt("tree feature count disagrees");
  }
  return out;
}

// ---- learner parameters ----------------------------------------------------

Json params_json(const LearnerParams& params) {
  return std::visit(
      [](const auto& p) -> Json {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, ForestParams>) {
          return Json{{"n_trees", p.n_trees},
                      {"max_features",
                       Json{{"kind", enum_json(p.max_features.kind)}, {"count", p.max_features.count}}},
                      {"bootstrap", p.bootstrap},
                      {"tree", tree_config_json(p.tree)}};
        } else if constexpr (std::is_same_v<P, MlpParams>) {
          return Json{{"hidden_size", p.hidden_size},
                      {"epochs", p.epochs},
                      {"learning_rate", real_json(p.learning_rate)}};
        } else if constexpr (std::is_same_v<P, KnnParams>) {
          return Json{{"k", p.k}};
        } else if constexpr (std::is_same_v<P, XgbParams>) {
          return Json{{"n_stages", p.n_stages},
                      {"learning_rate", real_json(p.learning_rate)},
                      {"lambda", real_json(p.lambda)},
                      {"gamma", real_json(p.gamma)},
                      {"max_depth", p.max_depth},
                      {"min_samples_leaf", p.min_samples_leaf}};
        } else if constexpr (std::is_same_v<P, LinearParams>) {
          return Json{{"epochs", p.epochs},
                      {"learning_rate", real_json(p.learning_rate)},
                      {"l2", real_json(p.l2)}};
        } else if constexpr (std::is_same_v<P, AdaBoostParams>) {
          return Json{{"n_stages", p.n_stages}, {"base", tree_config_json(p.base)}};
        } else if constexpr (std::is_same_v<P, CartParams>) {
          return Json{{"tree", tree_config_json(p.tree)}};
        } else {
          return Json{{"n_stages", p.n_stages},
                      {"learning_rate", real_json(p.learning_rate)},
                      {"tree", tree_config_json(p.tree)}};
        }
      },
      params);
}

ForestParams forest_params_of(const Json& j) {
  ForestParams p;
  p.n_trees = j.at("n_trees").get<int>();
  p.max_features.kind = enum_of<MaxFeatures::Kind>(j.at("max_features").at("kind"));
  p.max_features.count = j.at("max_features").at("count").get<int>();
  p.bootstrap = j.at("bootstrap").get<bool>();
  p.tree = tree_config_of(j.at("tree"));
  return p;
}

MlpParams mlp_params_of(const Json& j) {
  return MlpParams{j.at("hidden_size").get<int>(), j.at("epochs").get<int>(),
                   real_of(j.at("learning_rate"))};
}

XgbParams xgb_params_of(const Json& j) {
  XgbParams p;
  p.n_stages = j.at("n_stages").get<int>();
  p.learning_rate = real_of(j.at("learning_rate"));
  p.lambda = real_of(j.at("lambda"));
  p.gamma = real_of(j.at("gamma"));
  p.max_depth = j.at("max_depth").get<int>();
  p.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  return p;
}

LinearParams linear_params_of(const Json& j) {
  return LinearParams{j.at("epochs").get<int>(), real_of(j.at("learning_rate")),
                      real_of(j.at("l2"))};
}

AdaBoostParams adaboost_params_of(const Json& j) {
  AdaBoostParams p;
  p.n_stages = j.at("n_stages").get<int>();
  p.base = tree_config_of(j.at("base"));
  return p;
}

GbmParams gbm_params_of(const Json& j) {
  GbmParams p;
  p.n_stages = j.at("n_stages").get<int>();
  p.learning_rate = real_of(j.at("learning_rate"));
  p.tree = tree_config_of(j.at("tree"));
  return p;
}

LearnerParams params_of(LearnerKind kind, const Json& j) {
  switch (kind) {
    case LearnerKind::RF:
    case LearnerKind::ETC:
      return forest_params_of(j);
    case LearnerKind::MLP:
      return mlp_params_of(j);
    case LearnerKind::KNN:
      return KnnParams{j.at("k").get<int>()};
    case LearnerKind::XGB:
      return xgb_params_of(j);
    case LearnerKind::SVC:
      return linear_params_of(j);
    case LearnerKind::ADB:
      return adaboost_params_of(j);
    case LearnerKind::CART:
      return CartParams{tree_config_of(j.at("tree"))};
    case LearnerKind::GBM:
      return gbm_params_of(j);
  }
  corrupt("unknown learner kind");
}

Json spec_json(const BaseLearnerSpec& spec) {
  return Json{{"kind", spec.name()}, {"seed", spec.seed}, {"params", params_json(spec.params)}};
}

BaseLearnerSpec spec_of(const Json& j) {
  const auto name = j.at("kind").get<std::string>();
  const auto kind = parse_learner_name(name);
  if (!kind) corrupt("unknown learner '" + name + "'");
  BaseLearnerSpec spec;
  spec.kind = *kind;
  spec.seed = j.at("seed").get<std::uint64_t>();
  spec.params = params_of(*kind, j.at("params"));
  return spec;
}

// ---- fitted learners -------------------------------------------------------

Json linear_json(const LinearModel& m) {
  return Json{{"kind", enum_json(m.kind)},
              {"params", params_json(m.params)},
              {"seed", m.seed},
              {"weights", vector_json(m.weights)},
              {"bias", real_json(m.bias)}};
}

LinearModel linear_of(const Json& j) {
  LinearModel m;
  m.kind = enum_of<LinearKind>(j.at("kind"));
  m.params = linear_params_of(j.at("params"));
  m.seed = j.at("seed").get<std::uint64_t>();
  m.weights = vector_of(j.at("weights"));
  m.bias = real_of(j.at("bias"));
  return m;
}

Json learner_json(const LearnerModel& model) {
  return std::visit(
      [](const auto& m) -> Json {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, CartModel>) {
          return Json{{"type", "cart"}, {"params", params_json(m.params)}, {"tree", tree_json(m.tree)}};
        } else if constexpr (std::is_same_v<M, ForestModel>) {
          return Json{{"type", "forest"},
                      {"kind", enum_json(m.kind)},
                      {"params", params_json(m.params)},
                      {"seed", m.seed},
                      {"trees", trees_json(m.trees)}};
        } else if constexpr (std::is_same_v<M, AdaBoostModel>) {
          Json alphas = Json::array();
          for (double a : m.alphas) alphas.push_back(real_json(a));
          return Json{{"type", "adaboost"},
                      {"params", params_json(m.params)},
                      {"stumps", trees_json(m.stumps)},
                      {"alphas", std::move(alphas)}};
        } else if constexpr (std::is_same_v<M, GbmModel>) {
          return Json{{"type", "gbm"},
                      {"params", params_json(m.params)},
                      {"initial_score", real_json(m.initial_score)},
                      {"stages", trees_json(m.stages)}};
        } else if constexpr (std::is_same_v<M, XgbModel>) {
          return Json{{"type", "xgb"},
                      {"params", params_json(m.params)},
                      {"initial_score", real_json(m.initial_score)},
                      {"stages", trees_json(m.stages)}};
        } else if constexpr (std::is_same_v<M, KnnModel>) {
          return Json{{"type", "knn"},
                      {"params", params_json(m.params)},
                      {"features", matrix_json(m.features)},
                      {"labels", int_vector_json(m.labels)}};
        } else if constexpr (std::is_same_v<M, LinearModel>) {
          Json out{{"type", "linear"}};
          out.update(linear_json(m));
          return out;
        } else {
          return Json{{"type", "mlp"},
                      {"params", params_json(m.params)},
                      {"seed", m.seed},
                      {"hidden_weights", matrix_json(m.hidden_weights)},
                      {"hidden_bias", vector_json(m.hidden_bias)},
                      {"output_weights", vector_json(m.output_weights)},
                      {"output_bias", real_json(m.output_bias)}};
        }
      },
      model);
}

// n_features is the expected input width, checked against every component.
LearnerModel learner_of(const Json& j, int n_features) {
  const auto type = j.at("type").get<std::string>();
  if (type == "cart") {
    CartModel m{CartParams{tree_config_of(j.at("params").at("tree"))}, tree_of(j.at("tree"))};
    if (m.tree.n_features != n_features) corrupt("tree feature count disagrees");
    return m;
  }
  if (type == "forest") {
    ForestModel m;
    m.kind = enum_of<ForestKind>(j.at("kind"));
    m.params = forest_params_of(j.at("params"));
    m.seed = j.at("seed").get<std::uint64_t>();
    m.trees = trees_of(j.at("trees"), n_features);
    return m;
  }
  if (type == "adaboost") {
    AdaBoostModel m;
    m.params = adaboost_params_of(j.at("params"));
    m.stumps = trees_of(j.at("stumps"), n_features);
    for (const auto& a : j.at("alphas")) m.alphas.push_back(real_of(a));
    if (m.alphas.size() != m.stumps.size()) corrupt("alpha count disagrees with stump count");
    return m;
  }
  if (type == "gbm" || type == "xgb") {
    auto fill = [&](auto m) {
      m.initial_score = real_of(j.at("initial_score"));
      m.stages = trees_of(j.at("stages"), n_features);
      return m;
    };
    if (type == "gbm") {
      GbmModel m;
      m.params = gbm_params_of(j.at("params"));
      return fill(m);
    }
    XgbModel m;
    m.params = xgb_params_of(j.at("params"));
    return fill(m);
  }
  if (type == "knn") {
    KnnModel m;
    m.params = KnnParams{j.at("params").at("k").get<int>()};
    m.features = matrix_of(j.at("features"));
    m.labels = int_vector_of(j.at("labels"));
    if (m.features.cols() != n_features || m.labels.size() != m.features.rows() ||
        m.params.k < 1 || m.params.k > m.features.rows()) {
      corrupt("knn training data is inconsistent");
    }
    return m;
  }
  if (type == "linear") {
    auto m = linear_of(j);
    if (m.weights.size() != n_features) corrupt("linear weight count disagrees");
    return m;
  }
  if (type == "mlp") {
    MlpModel m;
    m.params = mlp_params_of(j.at("params"));
    m.seed = j.at("seed").get<std::uint64_t>();
    m.hidden_weights = matrix_of(j.at("hidden_weights"));
    m.hidden_bias = vector_of(j.at("hidden_bias"));
    m.output_weights = vector_of(j.at("output_weights"));
    m.output_bias = real_of(j.at("output_bias"));
    const auto h = m.hidden_weights.rows();
    if (m.hidden_weights.cols() != n_features || m.hidden_bias.size() != h ||
        m.output_weights.size() != h) {
      corrupt("mlp layer sizes disagree");
    }
    return m;
  }
  corrupt("unknown model type '" + type + "'");
}

Json stacked_json(const StackedModel& m) {
  Json specs = Json::array();
  for (const auto& s : m.base_specs) specs.push_back(spec_json(s));
  Json models = Json::array();
  for (const auto& b : m.base_models) models.push_back(learner_json(b));
  return Json{{"type", "stacked"},
              {"base_specs", std::move(specs)},
              {"base_models", std::move(models)},
              {"meta", linear_json(m.meta)},
              {"fold_plan",
               Json{{"k", m.fold_plan.k}, {"seed", m.fold_plan.seed}, {"folds", m.fold_plan.folds}}},
              {"layout", m.layout}};
}

StackedModel stacked_of(const Json& j, int n_features) {
  StackedModel m;
  for (const auto& s : j.at("base_specs")) m.base_specs.push_back(spec_of(s));
  for (const auto& b : j.at("base_models")) m.base_models.push_back(learner_of(b, n_features));
  m.meta = linear_of(j.at("meta"));
  const auto& plan = j.at("fold_plan");
  m.fold_plan.k = plan.at("k").get<int>();
  m.fold_plan.seed = plan.at("seed").get<std::uint64_t>();
  m.fold_plan.folds = plan.at("folds").get<std::vector<std::vector<int>>>();
  m.layout = j.at("layout").get<std::vector<std::string>>();
  const auto b = m.base_specs.size();
  if (b == 0 || m.base_models.size() != b || m.layout.size() != b ||
      static_cast<std::size_t>(m.meta.weights.size()) != b) {
    corrupt("stacked model component counts disagree");
  }
  return m;
}

// ---- schema and standardizer -----------------------------------------------

Json schema_json(const FeatureSchema& s) {
  Json columns = Json::array();
  for (const auto& c : s.columns) {
    Json cats = Json::array();
    for (double v : c.categories) cats.push_back(real_json(v));
    columns.push_back(Json{{"name", c.name},
                           {"kind", enum_json(c.kind)},
                           {"range", c.range ? Json::array({real_json(c.range->first),
                                                            real_json(c.range->second)})
                                             : Json(nullptr)},
                           {"categories", std::move(cats)}});
  }
  return Json{{"columns", std::move(columns)},
              {"target_name", s.target_name},
              {"positive_label", s.positive_label}};
}

FeatureSchema schema_of(const Json& j) {
  FeatureSchema s;
  for (const auto& c : j.at("columns")) {
    ColumnSpec col;
    col.name = c.at("name").get<std::string>();
    col.kind = enum_of<ColumnKind>(c.at("kind"));
    if (!c.at("range").is_null()) {
      col.range = std::pair{real_of(c.at("range").at(0)), real_of(c.at("range").at(1))};
    }
    for (const auto& v : c.at("categories")) col.categories.push_back(real_of(v));
    s.columns.push_back(std::move(col));
  }
  s.target_name = j.at("target_name").get<std::string>();
  s.positive_label = j.at("positive_label").get<int>();
  return s;
}

Json standardizer_json(const Standardizer& st) {
  Json mean = Json::array();
  Json stddev = Json::array();
  for (double v : st.stats().mean) mean.push_back(real_json(v));
  for (double v : st.stats().stddev) stddev.push_back(real_json(v));
  return Json{{"schema", schema_json(st.schema())},
              {"columns", st.stats().columns},
              {"mean", std::move(mean)},
              {"stddev", std::move(stddev)}};
}

Standardizer standardizer_of(const Json& j) {
  ColumnStats stats;
  stats.columns = j.at("columns").get<std::vector<int>>();
  for (const auto& v : j.at("mean")) stats.mean.push_back(real_of(v));
  for (const auto& v : j.at("stddev")) stats.stddev.push_back(real_of(v));
  auto schema = schema_of(j.at("schema"));
  if (stats.mean.size() != stats.columns.size() || stats.stddev.size() != stats.columns.size()) {
    corrupt("standardizer statistics disagree in length");
  }
  for (int c : stats.columns) {
    if (c < 0 || c >= schema.feature_count()) corrupt("standardizer column out of range");
  }
  return Standardizer(std::move(schema), std::move(stats));
}

}  // namespace

ProbabilityPairs predict_proba(const TrainedModel& model, const Eigen::MatrixXd& rows) {
  return std::visit([&](const auto& m) { return predict_proba(m, rows); }, model);
}

std::string serialize_model_file(const ModelFile& file) {
  Json model = std::visit(
      [](const auto& m) -> Json {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, StackedModel>) {
          return stacked_json(m);
        } else {
          return learner_json(m);
        }
      },
      file.model);
  Json root{{"format", kModelFormatName},
            {"version", file.version},
            {"fingerprint", Json{{"config_hash", file.fingerprint.config_hash},
                                 {"rows", file.fingerprint.rows},
                                 {"seed", file.fingerprint.seed}}},
            {"standardizer", standardizer_json(file.standardizer)},
            {"model", std::move(model)}};
  return root.dump() + "\n";
}

ModelFile parse_model_file(std::string_view text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ModelFileError(std::string("truncated or malformed model file: ") + e.what());
  }
  try {
    if (!root.is_object() || !root.contains("format") ||
        root.at("format") != std::string(kModelFormatName)) {
      throw ModelFileError("not a " + std::string(kModelFormatName) + " file");
    }
    ModelFile file;
    file.version = root.at("version").get<int>();
    if (file.version != kModelFormatVersion) {
      throw ModelFileError("unsupported model file version " + std::to_string(file.version) +
                           " (this build reads version " + std::to_string(kModelFormatVersion) +
                           ")");
    }
    const auto& fp = root.at("fingerprint");
    file.fingerprint.config_hash = fp.at("config_hash").get<std::uint64_t>();
    file.fingerprint.rows = fp.at("rows").get<std::uint64_t>();
    file.fingerprint.seed = fp.at("seed").get<std::uint64_t>();
    file.standardizer = standardizer_of(root.at("standardizer"));
    const int d = file.standardizer.schema().feature_count();
    const auto& model = root.at("model");
    if (model.at("type") == "stacked") {
      file.model = stacked_of(model, d);
    } else {
      file.model = learner_of(model, d);
    }
    return file;
  } catch (const Json::exception& e) {
    throw ModelFileError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const ModelFile& file, const std::filesystem::path& path) {
  const auto text = serialize_model_file(file);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelFileError("cannot write model file '" + path.string() + "'");
  out << text;
  if (!out.flush()) throw ModelFileError("failed writing model file '" + path.string() + "'");
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelFileError("cannot open model file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_model_file(buffer.str());
  } catch (const ModelFileError& e) {
    throw ModelFileError(path.string() + ": " + e.what());
  }
}

}  // namespace stackml
