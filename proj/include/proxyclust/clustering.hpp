#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "proxyclust/types.hpp"

namespace proxyclust {

// A partition of n items. Labels are compacted to [0, k) in order of first
// appearance, so equal partitions compare equal whatever ids they came with.
class Labeling {
 public:
  Labeling() = default;
  explicit Labeling(const std::vector<int>& raw);  // throws ConfigError on negative labels

  const std::vector<int>& assignments() const noexcept { return assignments_; }
  int k() const noexcept { return k_; }
  Index size() const noexcept { return static_cast<Index>(assignments_.size()); }
  int operator[](Index i) const { return assignments_[static_cast<std::size_t>(i)]; }

  friend bool operator==(const Labeling&, const Labeling&) = default;

 private:
  std::vector<int> assignments_;
  int k_ = 0;
};

// One integer per line.
Labeling read_labeling(const std::filesystem::path& path);
void write_labeling(const std::filesystem::path& path, const Labeling& labels);
std::string format_labeling(const Labeling& labels);

struct KMeansResult {
  Labeling labels;
  RowMatrix centroids;                 // k x d, row c is cluster c's mean
  double inertia = 0.0;                // sum of squared point-centroid distances
  int restart_index = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> inertia_history; // after each centroid update
};

inline constexpr int kDefaultKMeansIterations = 300;
inline constexpr int kDefaultRestarts = 10;

// Lloyd's algorithm from k distinct uniformly drawn points. An empty cluster
// takes the point farthest from its current centroid.
KMeansResult kmeans(const RowMatrix& points, int k, int max_iters, std::uint64_t seed);

struct KMeansRestarts {
  std::vector<KMeansResult> runs;  // run r used seed + r
  std::size_t best = 0;            // lowest inertia, earliest on ties
  const KMeansResult& best_run() const { return runs[best]; }
};

KMeansRestarts kmeans_restarts(const RowMatrix& points, int k, int restarts, std::uint64_t seed,
                               int max_iters = kDefaultKMeansIterations, int workers = 1);

double inertia(const RowMatrix& points, const Labeling& labels, const RowMatrix& centroids);

}  // namespace proxyclust
