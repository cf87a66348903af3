#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "proxyclust/builtin_encoder.hpp"
#include "proxyclust/clustering.hpp"
#include "proxyclust/concept_spec.hpp"
#include "proxyclust/metrics.hpp"
#include "proxyclust/optimizer.hpp"

namespace proxyclust {

struct LabelingRef {
  std::string name;
  std::filesystem::path path;
  int k = 0;
};

// manifest.json: {"images", "token_embeddings", "vocabulary",
//                 "encoder": {"kind": "builtin", "weights": dir | "seed": int, "max_len": int},
//                 "labelings": [{"name", "path", "k"}]}
struct DatasetManifest {
  std::filesystem::path images;
  std::filesystem::path token_embeddings;
  std::filesystem::path vocabulary;
  std::optional<std::filesystem::path> encoder_weights;
  std::uint64_t encoder_seed = 0;
  Index encoder_max_length = kDefaultMaxLength;
  std::vector<LabelingRef> labelings;

  static DatasetManifest load(const std::filesystem::path& path);  // resolves relative paths
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<UnitVector> images;
  TokenTable table;
};

struct GroundTruth {
  std::vector<std::string> names;
  std::vector<Labeling> labelings;
};

Dataset load_dataset(const DatasetManifest& manifest);
// Kept apart from load_dataset so optimization paths never see labels.
GroundTruth load_ground_truth(const DatasetManifest& manifest, Index n);

// Grid axes; an empty axis keeps the base value.
struct HyperGrid {
  std::vector<double> learning_rates;
  std::vector<double> weight_decays;
  std::vector<double> alphas;
  std::vector<double> betas;

  static HyperGrid defaults();  // 6 x 5 x 11 x 11
  std::vector<HyperParams> enumerate(const HyperParams& base) const;
};

enum class GridScope { concept_level, dataset };

struct ConceptEntry {
  std::filesystem::path spec;
  std::string clustering;  // manifest labeling that supplies k; defaults to the concept word
  int k = 0;               // overrides the manifest when > 0
};

struct RunConfig {
  std::filesystem::path dataset;
  std::vector<ConceptEntry> concepts;
  HyperParams hyper;
  std::optional<HyperGrid> grid;
  GridScope grid_scope = GridScope::concept_level;
  Variant variant = Variant::full;
  std::string backend = "builtin";  // builtin | remote:URL
  std::uint64_t seed = 0;
  int restarts = kDefaultRestarts;
  int kmeans_max_iters = kDefaultKMeansIterations;
  std::filesystem::path output_dir = "out";
  int workers = 1;

  static RunConfig load(const std::filesystem::path& path);
  static RunConfig parse(const std::string& text, const std::filesystem::path& base_dir = {});
  void validate() const;  // files exist, values in range; throws ConfigError
};

EncoderPtr make_encoder(const std::string& backend, const DatasetManifest& manifest);

struct GridPoint {
  HyperParams hyper;
  double mean_loss = 0.0;
  bool ok = false;
  std::string error;
};

struct GridReport {
  std::vector<GridPoint> points;
  std::size_t best = 0;
  const HyperParams& best_hyper() const { return points[best].hyper; }
};

// Mean final objective for every grid point; the minimum wins, earliest on
// ties. Throws NumericalError when every point fails.
GridReport grid_search(const std::vector<UnitVector>& images, const ConceptSpec& spec,
                       const std::vector<HyperParams>& grid, const TextEncoder& encoder, const TokenTable& table,
                       const OptimizeOptions& options = {});

struct ConceptResult {
  std::string concept_word;
  std::string clustering;
  int k = 0;
  bool ok = false;
  std::string error;
  int error_code = 0;
  std::string spec_hash;
  HyperParams hyper;
  ProxyBatch batch;
  KMeansRestarts restarts;
  std::vector<MetricSummary> metrics;  // one per ground truth
  std::optional<GridReport> grid;
};

struct PipelineResult {
  std::string backend;
  std::uint64_t seed = 0;
  Variant variant = Variant::full;
  std::vector<std::string> truth_names;
  std::vector<ConceptResult> concepts;
  CrossClustering cross;  // successful concepts x truths, lowest-inertia restart
  int exit_code() const;
};

// Select references, optimize, cluster, score against every ground truth, and
// write outputs to config.output_dir. Errors are caught per concept.
PipelineResult run_pipeline(const RunConfig& config);

// Just the grid searches (per concept, or pooled when scope is dataset).
std::vector<ConceptResult> run_grid_search(const RunConfig& config);

// metrics.csv and cross_clustering.csv.
void export_report(const PipelineResult& result, const std::filesystem::path& dir);
std::string format_metrics_table(const PipelineResult& result);
std::string format_cross_clustering(const PipelineResult& result);
std::string format_run_manifest(const PipelineResult& result);
std::string format_grid_report(const GridReport& report);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace proxyclust
