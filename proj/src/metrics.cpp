#include "proxyclust/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "proxyclust/errors.hpp"

namespace proxyclust {

namespace {

void check_lengths(const Labeling& a, const Labeling& b) {
  if (a.size() != b.size()) {
    throw DimensionError("labelings differ in length: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
}

double pairs(double m) { return m * (m - 1.0) / 2.0; }

double entropy(const Eigen::VectorXd& counts, double n) {
  double h = 0.0;
  for (Index i = 0; i < counts.size(); ++i)
    if (counts[i] > 0) h -= counts[i] / n * std::log(counts[i] / n);
  return h;
}

}  // namespace

Eigen::MatrixXi contingency_table(const Labeling& a, const Labeling& b) {
  check_lengths(a, b);
  Eigen::MatrixXi table = Eigen::MatrixXi::Zero(a.k(), b.k());
  for (Index i = 0; i < a.size(); ++i) ++table(a[i], b[i]);
  return table;
}

double rand_index(const Labeling& a, const Labeling& b) {
  check_lengths(a, b);
  if (a.size() < 2) throw ConfigError("rand index needs at least two items");
  const Eigen::MatrixXd t = contingency_table(a, b).cast<double>();
  const double n = static_cast<double>(a.size());
  double both = 0.0, in_a = 0.0, in_b = 0.0;
  for (Index i = 0; i < t.rows(); ++i)
    for (Index j = 0; j < t.cols(); ++j) both += pairs(t(i, j));
  const Eigen::VectorXd rows = t.rowwise().sum(), cols = t.colwise().sum().transpose();
  for (Index i = 0; i < rows.size(); ++i) in_a += pairs(rows[i]);
  for (Index j = 0; j < cols.size(); ++j) in_b += pairs(cols[j]);
  const double total = pairs(n);
  const double separated_both = total - in_a - in_b + both;
  return (both + separated_both) / total;
}

double nmi(const Labeling& a, const Labeling& b) {
  check_lengths(a, b);
  if (a.size() < 1) throw ConfigError("nmi needs at least one item");
  const Eigen::MatrixXd t = contingency_table(a, b).cast<double>();
  const double n = static_cast<double>(a.size());
  const Eigen::VectorXd rows = t.rowwise().sum(), cols = t.colwise().sum().transpose();
  const double ha = entropy(rows, n), hb = entropy(cols, n);
  if (ha == 0.0 && hb == 0.0) return 1.0;
  if (a == b) return 1.0;
  double mi = 0.0;
  for (Index i = 0; i < t.rows(); ++i) {
    for (Index j = 0; j < t.cols(); ++j) {
      if (t(i, j) > 0) mi += t(i, j) / n * (std::log(t(i, j) / n) - std::log(rows[i] / n) - std::log(cols[j] / n));
    }
  }
  const double value = mi / ((ha + hb) / 2.0);
  return std::clamp(value, 0.0, 1.0);
}

CrossClustering cross_clustering_matrix(const std::vector<Labeling>& predicted, const std::vector<Labeling>& truths) {
  CrossClustering out{Matrix(predicted.size(), truths.size()), Matrix(predicted.size(), truths.size())};
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    for (std::size_t j = 0; j < truths.size(); ++j) {
      out.nmi(i, j) = nmi(predicted[i], truths[j]);
      out.ri(i, j) = rand_index(predicted[i], truths[j]);
    }
  }
  return out;
}

MetricSummary summarize_restarts(const KMeansRestarts& restarts, const Labeling& truth) {
  MetricSummary s;
  for (const auto& run : restarts.runs) {
    s.nmi_mean += nmi(run.labels, truth);
    s.ri_mean += rand_index(run.labels, truth);
  }
  const double r = static_cast<double>(restarts.runs.size());
  s.nmi_mean /= r;
  s.ri_mean /= r;
  s.nmi_best = nmi(restarts.best_run().labels, truth);
  s.ri_best = rand_index(restarts.best_run().labels, truth);
  return s;
}

}  // namespace proxyclust
