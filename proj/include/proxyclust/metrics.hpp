#pragma once

#include <vector>

#include "proxyclust/clustering.hpp"

namespace proxyclust {

// Counts n_ij of items labelled i in `a` and j in `b`.
Eigen::MatrixXi contingency_table(const Labeling& a, const Labeling& b);

// Fraction of item pairs on which the two partitions agree. Needs n >= 2.
double rand_index(const Labeling& a, const Labeling& b);

// I(A;B) / ((H(A) + H(B)) / 2), natural logs; 1 when both entropies vanish.
double nmi(const Labeling& a, const Labeling& b);

struct CrossClustering {
  Matrix nmi;  // predicted x truths
  Matrix ri;
};

CrossClustering cross_clustering_matrix(const std::vector<Labeling>& predicted, const std::vector<Labeling>& truths);

struct MetricSummary {
  double nmi_mean = 0.0, nmi_best = 0.0;
  double ri_mean = 0.0, ri_best = 0.0;
};

// Means over all restarts; "best" is the lowest-inertia restart.
MetricSummary summarize_restarts(const KMeansRestarts& restarts, const Labeling& truth);

}  // namespace proxyclust
