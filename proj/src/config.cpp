#include "stackml/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "stackml/error.hpp"
#include "stackml/stacking.hpp"

namespace stackml {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

template <typename T>
T parse_integer(const std::string& text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw InputError("expected an integer, found '" + text + "'");
  }
  return value;
}

double parse_number(const std::string& text) {
  const auto l = lower(text);
  if (l == "inf" || l == "infinity") return std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || std::isnan(value)) {
    throw InputError("expected a number, found '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& text) {
  const auto l = lower(text);
  if (l == "true" || l == "yes" || l == "1") return true;
  if (l == "false" || l == "no" || l == "0") return false;
  throw InputError("expected true or false, found '" + text + "'");
}

std::string number_text(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_real(v);
}

std::optional<int> parse_depth(const std::string& text) {
  if (lower(text) == "none") return std::nullopt;
  return parse_integer<int>(text);
}

std::string depth_text(const std::optional<int>& d) { return d ? std::to_string(*d) : "none"; }

MaxFeatures parse_max_features(const std::string& text) {
  const auto l = lower(text);
  if (l == "sqrt") return MaxFeatures::sqrt();
  if (l == "all") return MaxFeatures::all();
  return MaxFeatures::fixed(parse_integer<int>(text));
}

std::string max_features_text(const MaxFeatures& m) {
  switch (m.kind) {
    case MaxFeatures::Kind::all:
      return "all";
    case MaxFeatures::Kind::sqrt:
      return "sqrt";
    case MaxFeatures::Kind::count:
      break;
  }
  return std::to_string(m.count);
}

SplitCriterion parse_class_criterion(const std::string& text) {
  const auto l = lower(text);
  if (l == "gini") return SplitCriterion::gini;
  if (l == "entropy") return SplitCriterion::entropy;
  throw InputError("expected gini or entropy, found '" + text + "'");
}

std::string criterion_text(SplitCriterion c) {
  return c == SplitCriterion::entropy ? "entropy" : "gini";
}

std::size_t slot(LearnerKind kind) { return static_cast<std::size_t>(kind); }

template <typename P>
P& params(ExperimentConfig& c, LearnerKind kind) {
  return std::get<P>(c.learners[slot(kind)].params);
}
template <typename P>
const P& params(const ExperimentConfig& c, LearnerKind kind) {
  return std::get<P>(c.learners[slot(kind)].params);
}

struct Key {
  std::string name;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define STACKML_KEY(NAME, SET, GET)                                                   \
  keys.push_back(Key{NAME, [](ExperimentConfig& c, const std::string& v) { SET; },    \
                     [](const ExperimentConfig& c) -> std::string { return GET; }})

void add_forest_keys(std::vector<Key>& keys, const std::string& prefix, LearnerKind kind) {
  auto add = [&](const std::string& name, auto set, auto get) {
    keys.push_back(Key{prefix + "." + name,
                       [kind, set](ExperimentConfig& c, const std::string& v) {
                         set(params<ForestParams>(c, kind), v);
                       },
                       [kind, get](const ExperimentConfig& c) {
                         return get(params<ForestParams>(c, kind));
                       }});
  };
  add("n_trees", [](ForestParams& p, const std::string& v) { p.n_trees = parse_integer<int>(v); },
      [](const ForestParams& p) { return std::to_string(p.n_trees); });
  add("max_features",
      [](ForestParams& p, const std::string& v) { p.max_features = parse_max_features(v); },
      [](const ForestParams& p) { return max_features_text(p.max_features); });
  add("bootstrap", [](ForestParams& p, const std::string& v) { p.bootstrap = parse_bool(v); },
      [](const ForestParams& p) { return std::string(p.bootstrap ? "true" : "false"); });
  add("criterion",
      [](ForestParams& p, const std::string& v) { p.tree.criterion = parse_class_criterion(v); },
      [](const ForestParams& p) { return criterion_text(p.tree.criterion); });
  add("max_depth", [](ForestParams& p, const std::string& v) { p.tree.max_depth = parse_depth(v); },
      [](const ForestParams& p) { return depth_text(p.tree.max_depth); });
  add("min_samples_split",
      [](ForestParams& p, const std::string& v) { p.tree.min_samples_split = parse_integer<int>(v); },
      [](const ForestParams& p) { return std::to_string(p.tree.min_samples_split); });
  add("min_samples_leaf",
      [](ForestParams& p, const std::string& v) { p.tree.min_samples_leaf = parse_integer<int>(v); },
      [](const ForestParams& p) { return std::to_string(p.tree.min_samples_leaf); });
}

const std::vector<Key>& registry() {
  static const std::vector<Key> table = [] {
    std::vector<Key> keys;
    STACKML_KEY("data.path", c.data_path = v, c.data_path.generic_string());
    STACKML_KEY("prep.z_threshold", c.z_threshold = parse_number(v), number_text(c.z_threshold));
    STACKML_KEY("split.test_fraction", c.test_fraction = parse_number(v),
                number_text(c.test_fraction));
    STACKML_KEY("cv.k_folds", c.k_folds = parse_integer<int>(v), std::to_string(c.k_folds));
    STACKML_KEY("seed", set_seed(c, parse_integer<std::uint64_t>(v)), std::to_string(c.seed));
    STACKML_KEY(
        "metrics.mode",
        {
          const auto l = lower(v);
          if (l == "standard") c.metrics_mode = MetricsMode::standard;
          else if (l == "paper") c.metrics_mode = MetricsMode::paper;
          else throw InputError("expected standard or paper, found '" + v + "'");
        },
        c.metrics_mode == MetricsMode::paper ? "paper" : "standard");
    STACKML_KEY(
        "pipeline.order",
        {
          const auto l = lower(v);
          if (l == "safe") c.order = PipelineOrder::safe;
          else if (l == "paper") c.order = PipelineOrder::paper;
          else throw InputError("expected safe or paper, found '" + v + "'");
        },
        c.order == PipelineOrder::paper ? "paper" : "safe");
    STACKML_KEY(
        "roster",
        {
          c.roster.clear();
          std::stringstream in(v);
          std::string item;
          while (std::getline(in, item, ',')) {
            const auto name = trim(item);
            std::string upper = name;
            std::transform(upper.begin(), upper.end(), upper.begin(),
                           [](unsigned char ch) { return static_cast<char>(std::toupper(ch)); });
            const auto kind = parse_learner_name(upper);
            if (!kind) throw InputError("unknown learner '" + name + "'");
            c.roster.push_back(*kind);
          }
        },
        [&c] {
          std::string out;
          for (auto k : c.roster) out += (out.empty() ? "" : ", ") + std::string(learner_name(k));
          return out;
        }());

    add_forest_keys(keys, "rf", LearnerKind::RF);
    add_forest_keys(keys, "etc", LearnerKind::ETC);

    STACKML_KEY("mlp.hidden_size",
                params<MlpParams>(c, LearnerKind::MLP).hidden_size = parse_integer<int>(v),
                std::to_string(params<MlpParams>(c, LearnerKind::MLP).hidden_size));
    STACKML_KEY("mlp.epochs", params<MlpParams>(c, LearnerKind::MLP).epochs = parse_integer<int>(v),
                std::to_string(params<MlpParams>(c, LearnerKind::MLP).epochs));
    STACKML_KEY("mlp.learning_rate",
                params<MlpParams>(c, LearnerKind::MLP).learning_rate = parse_number(v),
                number_text(params<MlpParams>(c, LearnerKind::MLP).learning_rate));

    STACKML_KEY("knn.k", params<KnnParams>(c, LearnerKind::KNN).k = parse_integer<int>(v),
                std::to_string(params<KnnParams>(c, LearnerKind::KNN).k));

    STACKML_KEY("xgb.n_stages",
                params<XgbParams>(c, LearnerKind::XGB).n_stages = parse_integer<int>(v),
                std::to_string(params<XgbParams>(c, LearnerKind::XGB).n_stages));
    STACKML_KEY("xgb.learning_rate",
                params<XgbParams>(c, LearnerKind::XGB).learning_rate = parse_number(v),
                number_text(params<XgbParams>(c, LearnerKind::XGB).learning_rate));
    STACKML_KEY("xgb.lambda", params<XgbParams>(c, LearnerKind::XGB).lambda = parse_number(v),
                number_text(params<XgbParams>(c, LearnerKind::XGB).lambda));
    STACKML_KEY("xgb.gamma", params<XgbParams>(c, LearnerKind::XGB).gamma = parse_number(v),
                number_text(params<XgbParams>(c, LearnerKind::XGB).gamma));
    STACKML_KEY("xgb.max_depth",
                params<XgbParams>(c, LearnerKind::XGB).max_depth = parse_integer<int>(v),
                std::to_string(params<XgbParams>(c, LearnerKind::XGB).max_depth));
    STACKML_KEY("xgb.min_samples_leaf",
                params<XgbParams>(c, LearnerKind::XGB).min_samples_leaf = parse_integer<int>(v),
                std::to_string(params<XgbParams>(c, LearnerKind::XGB).min_samples_leaf));

    STACKML_KEY("svc.epochs",
                params<LinearParams>(c, LearnerKind::SVC).epochs = parse_integer<int>(v),
                std::to_string(params<LinearParams>(c, LearnerKind::SVC).epochs));
    STACKML_KEY("svc.learning_rate",
                params<LinearParams>(c, LearnerKind::SVC).learning_rate = parse_number(v),
                number_text(params<LinearParams>(c, LearnerKind::SVC).learning_rate));
    STACKML_KEY("svc.l2", params<LinearParams>(c, LearnerKind::SVC).l2 = parse_number(v),
                number_text(params<LinearParams>(c, LearnerKind::SVC).l2));

    STACKML_KEY("adb.n_stages",
                params<AdaBoostParams>(c, LearnerKind::ADB).n_stages = parse_integer<int>(v),
                std::to_string(params<AdaBoostParams>(c, LearnerKind::ADB).n_stages));
    STACKML_KEY("adb.max_depth",
                params<AdaBoostParams>(c, LearnerKind::ADB).base.max_depth = parse_depth(v),
                depth_text(params<AdaBoostParams>(c, LearnerKind::ADB).base.max_depth));

    STACKML_KEY("cart.criterion",
                params<CartParams>(c, LearnerKind::CART).tree.criterion = parse_class_criterion(v),
                criterion_text(params<CartParams>(c, LearnerKind::CART).tree.criterion));
    STACKML_KEY("cart.max_depth",
                params<CartParams>(c, LearnerKind::CART).tree.max_depth = parse_depth(v),
                depth_text(params<CartParams>(c, LearnerKind::CART).tree.max_depth));
    STACKML_KEY(
        "cart.min_samples_split",
        params<CartParams>(c, LearnerKind::CART).tree.min_samples_split = parse_integer<int>(v),
        std::to_string(params<CartParams>(c, LearnerKind::CART).tree.min_samples_split));
    STACKML_KEY(
        "cart.min_samples_leaf",
        params<CartParams>(c, LearnerKind::CART).tree.min_samples_leaf = parse_integer<int>(v),
        std::to_string(params<CartParams>(c, LearnerKind::CART).tree.min_samples_leaf));

    STACKML_KEY("gbm.n_stages",
                params<GbmParams>(c, LearnerKind::GBM).n_stages = parse_integer<int>(v),
                std::to_string(params<GbmParams>(c, LearnerKind::GBM).n_stages));
    STACKML_KEY("gbm.learning_rate",
                params<GbmParams>(c, LearnerKind::GBM).learning_rate = parse_number(v),
                number_text(params<GbmParams>(c, LearnerKind::GBM).learning_rate));
    STACKML_KEY("gbm.max_depth",
                params<GbmParams>(c, LearnerKind::GBM).tree.max_depth = parse_depth(v),
                depth_text(params<GbmParams>(c, LearnerKind::GBM).tree.max_depth));
    STACKML_KEY(
        "gbm.min_samples_leaf",
        params<GbmParams>(c, LearnerKind::GBM).tree.min_samples_leaf = parse_integer<int>(v),
        std::to_string(params<GbmParams>(c, LearnerKind::GBM).tree.min_samples_leaf));

    STACKML_KEY("meta.epochs", c.meta.epochs = parse_integer<int>(v), std::to_string(c.meta.epochs));
    STACKML_KEY("meta.learning_rate", c.meta.learning_rate = parse_number(v),
                number_text(c.meta.learning_rate));
    STACKML_KEY("meta.l2", c.meta.l2 = parse_number(v), number_text(c.meta.l2));
    return keys;
  }();
  return table;
}

#undef STACKML_KEY

constexpr std::string_view kColumnPrefix = "data.columns.";

void require(bool ok, const std::string& message) {
  if (!ok) throw InputError("invalid config: " + message);
}

void validate_tree(const TreeConfig& t, const std::string& who) {
  require(!t.max_depth || *t.max_depth >= 0, who + ".max_depth must be >= 0 or none");
  require(t.min_samples_split >= 2, who + ".min_samples_split must be >= 2");
  require(t.min_samples_leaf >= 1, who + ".min_samples_leaf must be >= 1");
}

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.roster = default_roster();
  c.learners.resize(default_roster().size());
  for (auto kind : default_roster()) c.learners[slot(kind)] = default_spec(kind, c.seed);
  c.meta = default_meta_params();
  return c;
}

void set_seed(ExperimentConfig& config, std::uint64_t seed) {
  config.seed = seed;
  for (auto& spec : config.learners) spec.seed = seed;
}

std::vector<BaseLearnerSpec> roster_specs(const ExperimentConfig& config) {
  std::vector<BaseLearnerSpec> out;
  for (auto kind : config.roster) out.push_back(config.learners[slot(kind)]);
  return out;
}

ExperimentConfig parse_config(std::string_view text, const std::string& source) {
  auto config = default_config();
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw InputError(where + "expected 'key = value'");
    const auto key = trim(std::string_view(body).substr(0, eq));
    const auto value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw InputError(where + "missing key");
    if (!seen.insert(key).second) throw InputError(where + "key '" + key + "' given twice");
    try {
      if (key.starts_with(kColumnPrefix)) {
        const auto column = key.substr(kColumnPrefix.size());
        const auto schema = heart_schema();
        const bool known =
            column == schema.target_name ||
            std::any_of(schema.columns.begin(), schema.columns.end(),
                        [&](const ColumnSpec& c) { return c.name == column; });
        if (!known) throw InputError("unknown column '" + column + "'");
        if (value.empty()) throw InputError("empty column name");
        config.columns[column] = value;
        continue;
      }
      const auto& keys = registry();
      const auto it = std::find_if(keys.begin(), keys.end(),
                                   [&](const Key& k) { return k.name == key; });
      if (it == keys.end()) throw InputError("unknown key '" + key + "'");
      it->set(config, value);
    } catch (const InputError& e) {
      throw InputError(where + e.what());
    } catch (const std::bad_variant_access&) {
      throw InputError(where + "internal parameter mismatch for '" + key + "'");
    }
  }
  validate_config(config);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  auto config = parse_config(buffer.str(), path.string());
  if (!config.data_path.empty() && config.data_path.is_relative()) {
    config.data_path = (path.parent_path() / config.data_path).lexically_normal();
  }
  return config;
}

void validate_config(const ExperimentConfig& c) {
  require(c.z_threshold > 0, "prep.z_threshold must be positive");
  require(c.test_fraction > 0 && c.test_fraction < 1, "split.test_fraction must be in (0, 1)");
  require(c.k_folds >= 2, "cv.k_folds must be >= 2");
  require(!c.roster.empty(), "roster must name at least one learner");
  std::set<LearnerKind> unique(c.roster.begin(), c.roster.end());
  require(unique.size() == c.roster.size(), "roster lists a learner twice");

  for (auto kind : {LearnerKind::RF, LearnerKind::ETC}) {
    const auto& p = params<ForestParams>(c, kind);
    const auto who = lower(std::string(learner_name(kind)));
    require(p.n_trees >= 1, who + ".n_trees must be >= 1");
    require(p.max_features.kind != MaxFeatures::Kind::count || p.max_features.count >= 1,
            who + ".max_features must be sqrt, all or a positive count");
    validate_tree(p.tree, who);
  }
  const auto& mlp = params<MlpParams>(c, LearnerKind::MLP);
  require(mlp.hidden_size >= 1, "mlp.hidden_size must be >= 1");
  require(mlp.epochs >= 0, "mlp.epochs must be >= 0");
  require(mlp.learning_rate > 0 && std::isfinite(mlp.learning_rate),
          "mlp.learning_rate must be positive");
  require(params<KnnParams>(c, LearnerKind::KNN).k >= 1, "knn.k must be >= 1");
  const auto& xgb = params<XgbParams>(c, LearnerKind::XGB);
  require(xgb.n_stages >= 0, "xgb.n_stages must be >= 0");
  require(xgb.learning_rate > 0 && std::isfinite(xgb.learning_rate),
          "xgb.learning_rate must be positive");
  require(xgb.lambda >= 0 && std::isfinite(xgb.lambda), "xgb.lambda must be >= 0");
  require(xgb.gamma >= 0 && std::isfinite(xgb.gamma), "xgb.gamma must be >= 0");
  require(xgb.max_depth >= 0, "xgb.max_depth must be >= 0");
  require(xgb.min_samples_leaf >= 1, "xgb.min_samples_leaf must be >= 1");
  const auto& svc = params<LinearParams>(c, LearnerKind::SVC);
  require(svc.epochs >= 0, "svc.epochs must be >= 0");
  require(svc.learning_rate > 0 && std::isfinite(svc.learning_rate),
          "svc.learning_rate must be positive");
  require(svc.l2 >= 0 && std::isfinite(svc.l2), "svc.l2 must be >= 0");
  const auto& adb = params<AdaBoostParams>(c, LearnerKind::ADB);
  require(adb.n_stages >= 0, "adb.n_stages must be >= 0");
  validate_tree(adb.base, "adb");
  validate_tree(params<CartParams>(c, LearnerKind::CART).tree, "cart");
  const auto& gbm = params<GbmParams>(c, LearnerKind::GBM);
  require(gbm.n_stages >= 0, "gbm.n_stages must be >= 0");
  require(gbm.learning_rate > 0 && std::isfinite(gbm.learning_rate),
          "gbm.learning_rate must be positive");
  validate_tree(gbm.tree, "gbm");
  require(c.meta.epochs >= 0, "meta.epochs must be >= 0");
  require(c.meta.learning_rate > 0 && std::isfinite(c.meta.learning_rate),
          "meta.learning_rate must be positive");
  require(c.meta.l2 >= 0 && std::isfinite(c.meta.l2), "meta.l2 must be >= 0");
}

namespace {

std::string render(const ExperimentConfig& config, bool with_path) {
  std::string out;
  for (const auto& key : registry()) {
    if (key.name == "data.path") {
      if (with_path) out += "data.path = " + key.get(config) + "\n";
      for (const auto& [column, header] : config.columns) {
        out += std::string(kColumnPrefix) + column + " = " + header + "\n";
      }
      continue;
    }
    out += key.name + " = " + key.get(config) + "\n";
  }
  return out;
}

}  // namespace

std::string render_config(const ExperimentConfig& config) { return render(config, true); }

std::uint64_t config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : render(config, false)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& key : registry()) out.push_back(key.name);
  return out;
}

}  // namespace stackml
