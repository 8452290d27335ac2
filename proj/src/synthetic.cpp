#include "stackml/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stackml/random.hpp"

namespace stackml {

namespace {

double normal(Rng& rng, double mean, double sd) {
  // Box-Muller; uniform_open keeps the logarithm finite.
  const double u1 = rng.uniform_open(0.0, 1.0);
  const double u2 = rng.uniform();
  return mean + sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Clamped to [lo, hi] and rounded to 1 / per_unit.
double bounded(Rng& rng, double mean, double sd, double lo, double hi, double per_unit) {
  const double v = std::clamp(normal(rng, mean, sd), lo, hi);
  return std::round(v * per_unit) / per_unit;
}

int bernoulli(Rng& rng, double p) { return rng.uniform() < p ? 1 : 0; }

double categorical(Rng& rng, std::initializer_list<std::pair<double, double>> table) {
  double u = rng.uniform();
  double last = 0.0;
  for (const auto& [value, p] : table) {
    last = value;
    if (u < p) return value;
    u -= p;
  }
  return last;
}

}  // namespace

LabeledDataset synthesize_heart_like(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  LabeledDataset out;
  out.schema = heart_schema();
  const auto n = static_cast<Eigen::Index>(rows);
  out.features.resize(n, out.schema.feature_count());
  out.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = bernoulli(rng, 0.53);
    const double s = y;
    auto row = out.features.row(i);
    row(0) = bounded(rng, 50.0 + 4.0 * s, 9.0, 28, 77, 1);
    row(1) = bernoulli(rng, 0.65 + 0.2 * s);
    row(2) = y ? categorical(rng, {{1, 0.04}, {2, 0.06}, {3, 0.15}, {4, 0.75}})
               : categorical(rng, {{1, 0.08}, {2, 0.35}, {3, 0.40}, {4, 0.17}});
    row(3) = bounded(rng, 131.0 + 4.0 * s, 18.0, 80, 200, 1);
    row(4) = bounded(rng, 238.0 - 15.0 * s, 52.0, 85, 603, 1);
    row(5) = bernoulli(rng, 0.12 + 0.12 * s);
    row(6) = categorical(rng, {{0, 0.60 - 0.05 * s}, {1, 0.18 + 0.05 * s}, {2, 0.22}});
    row(7) = bounded(rng, 150.0 - 21.0 * s, 22.0, 60, 202, 1);
    row(8) = bernoulli(rng, 0.14 + 0.45 * s);
    row(9) = std::max(0.0, bounded(rng, 0.4 + 1.0 * s, 0.9, -2.6, 6.2, 10));
    row(10) = y ? categorical(rng, {{0, 0.005}, {1, 0.18}, {2, 0.72}, {3, 0.095}})
                : categorical(rng, {{0, 0.002}, {1, 0.77}, {2, 0.2}, {3, 0.028}});
    out.labels(i) = y;
    out.row_ids.push_back(static_cast<std::size_t>(i));
  }
  return out;
}

}  // namespace stackml
