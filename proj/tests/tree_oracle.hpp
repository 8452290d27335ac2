#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <vector>

// Exhaustive root-split search used as an oracle in tests. Recomputes every
// candidate partition from scratch with plain counting; shares no code with
// the library's incremental sweep.
namespace stackml::testing {

struct OracleSplit {
  int feature;
  double threshold;
  double gain;
};

inline double gini_from_counts(double n0, double n1) {
  const double n = n0 + n1;
  const double p0 = n0 / n;
  const double p1 = n1 / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

// Every (feature, midpoint) candidate with its Gini gain.
inline std::vector<OracleSplit> enumerate_gini_splits(const Eigen::MatrixXd& x,
                                                      const Eigen::VectorXi& y) {
  std::vector<OracleSplit> out;
  const auto n = x.rows();
  double p0 = 0;
  double p1 = 0;
  for (Eigen::Index i = 0; i < n; ++i) (y(i) == 1 ? p1 : p0) += 1;
  const double parent = gini_from_counts(p0, p1);
  for (int f = 0; f < x.cols(); ++f) {
    std::vector<double> values(x.col(f).data(), x.col(f).data() + n);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t v = 0; v + 1 < values.size(); ++v) {
      const double t = (values[v] + values[v + 1]) / 2.0;
      double l0 = 0, l1 = 0, r0 = 0, r1 = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (x(i, f) <= t) {
          (y(i) == 1 ? l1 : l0) += 1;
        } else {
          (y(i) == 1 ? r1 : r0) += 1;
        }
      }
      const double gain = parent - (l0 + l1) / n * gini_from_counts(l0, l1) -
                          (r0 + r1) / n * gini_from_counts(r0, r1);
      out.push_back({f, t, gain});
    }
  }
  return out;
}

}  // namespace stackml::testing
