#include "proxyclust/clustering.hpp"

#include <limits>
#include <sstream>
#include <unordered_map>

#include "proxyclust/errors.hpp"
#include "proxyclust/matrix_io.hpp"
#include "proxyclust/parallel.hpp"
#include "proxyclust/rng.hpp"

namespace proxyclust {

Labeling::Labeling(const std::vector<int>& raw) {
  std::unordered_map<int, int> remap;
  assignments_.reserve(raw.size());
  for (int label : raw) {
    if (label < 0) throw ConfigError("labeling contains negative label " + std::to_string(label));
    auto [it, inserted] = remap.emplace(label, k_);
    if (inserted) ++k_;
    assignments_.push_back(it->second);
  }
}

std::string format_labeling(const Labeling& labels) {
  std::string out;
  for (int a : labels.assignments()) {
    out += std::to_string(a);
    out += '\n';
  }
  return out;
}

void write_labeling(const std::filesystem::path& path, const Labeling& labels) {
  write_file_atomic(path, format_labeling(labels));
}

Labeling read_labeling(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<int> raw;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(line, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != line.size()) {
      throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": expected an integer label");
    }
    raw.push_back(value);
  }
  return Labeling(raw);
}

double inertia(const RowMatrix& points, const Labeling& labels, const RowMatrix& centroids) {
  double total = 0.0;
  for (Index i = 0; i < points.rows(); ++i) total += (points.row(i) - centroids.row(labels[i])).squaredNorm();
  return total;
}

namespace {

struct Assignment {
  std::vector<int> label;
  std::vector<double> dist;  // squared distance to the assigned centroid
};

Assignment assign(const RowMatrix& points, const RowMatrix& centroids) {
  const Index n = points.rows();
  Assignment a{std::vector<int>(static_cast<std::size_t>(n)), std::vector<double>(static_cast<std::size_t>(n))};
  for (Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Index c = 0; c < centroids.rows(); ++c) {
      const double d = (points.row(i) - centroids.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        arg = static_cast<int>(c);
      }
    }
    a.label[static_cast<std::size_t>(i)] = arg;
    a.dist[static_cast<std::size_t>(i)] = best;
  }
  return a;
}

// Moves the farthest point of a multi-member cluster into each empty cluster.
void reseed_empty(Assignment& a, int k) {
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (int l : a.label) ++counts[static_cast<std::size_t>(l)];
  for (int c = 0; c < k; ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) continue;
    std::ptrdiff_t far = -1;
    for (std::size_t i = 0; i < a.label.size(); ++i) {
      if (counts[static_cast<std::size_t>(a.label[i])] < 2) continue;
      if (far < 0 || a.dist[i] > a.dist[static_cast<std::size_t>(far)]) far = static_cast<std::ptrdiff_t>(i);
    }
    if (far < 0) return;
    --counts[static_cast<std::size_t>(a.label[static_cast<std::size_t>(far)])];
    a.label[static_cast<std::size_t>(far)] = c;
    a.dist[static_cast<std::size_t>(far)] = 0.0;
    counts[static_cast<std::size_t>(c)] = 1;
  }
}

}  // namespace

KMeansResult kmeans(const RowMatrix& points, int k, int max_iters, std::uint64_t seed) {
  const Index n = points.rows();
  if (n < 1) throw ConfigError("kmeans: no points");
  if (k < 1 || k > n) {
    throw ConfigError("kmeans: k = " + std::to_string(k) + " must lie in [1, " + std::to_string(n) + "]");
  }
  if (max_iters < 1) throw ConfigError("kmeans: max_iters must be positive");
  if (!points.allFinite()) throw NumericalError("kmeans: non-finite input");

  Rng rng(seed);
  RowMatrix centroids(k, points.cols());
  const auto init = rng.sample_without_replacement(static_cast<std::size_t>(n), static_cast<std::size_t>(k));
  for (int c = 0; c < k; ++c) centroids.row(c) = points.row(static_cast<Index>(init[static_cast<std::size_t>(c)]));

  KMeansResult result;
  std::vector<int> previous;
  for (int it = 0; it < max_iters; ++it) {
    Assignment a = assign(points, centroids);
    reseed_empty(a, k);
    if (a.label == previous) {
      result.converged = true;
      break;
    }
    RowMatrix sums = RowMatrix::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      const int l = a.label[static_cast<std::size_t>(i)];
      sums.row(l) += points.row(i);
      ++counts[static_cast<std::size_t>(l)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) centroids.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
    }
    previous = std::move(a.label);
    result.iterations = it + 1;
    double j = 0.0;
    for (Index i = 0; i < n; ++i) j += (points.row(i) - centroids.row(previous[static_cast<std::size_t>(i)])).squaredNorm();
    result.inertia_history.push_back(j);
  }

  // Compact ids by first appearance and carry the centroid rows along.
  result.labels = Labeling(previous);
  result.centroids.resize(result.labels.k(), points.cols());
  for (Index i = 0; i < n; ++i) result.centroids.row(result.labels[i]) = centroids.row(previous[static_cast<std::size_t>(i)]);
  result.inertia = inertia(points, result.labels, result.centroids);
  return result;
}

KMeansRestarts kmeans_restarts(const RowMatrix& points, int k, int restarts, std::uint64_t seed, int max_iters,
                               int workers) {
  if (restarts < 1) throw ConfigError("kmeans: restarts must be at least 1");
  KMeansRestarts out;
  out.runs.resize(static_cast<std::size_t>(restarts));
  parallel_for(restarts, workers, [&](Index r) {
    auto run = kmeans(points, k, max_iters, seed + static_cast<std::uint64_t>(r));
    run.restart_index = static_cast<int>(r);
    out.runs[static_cast<std::size_t>(r)] = std::move(run);
  });
  for (std::size_t r = 1; r < out.runs.size(); ++r)
    if (out.runs[r].inertia < out.runs[out.best].inertia) out.best = r;
  return out;
}

}  // namespace proxyclust
