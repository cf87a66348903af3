#include "proxyclust/pipeline.hpp"

#include <cstdio>
#include <cctype>
#include <set>

#include "json.hpp"
#include "proxyclust/builtin_encoder.hpp"
#include "proxyclust/errors.hpp"
#include "proxyclust/matrix_io.hpp"
#include "proxyclust/remote_encoder.hpp"

namespace proxyclust {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_relative() ? base / path : path;
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw ConfigError(what + " '" + p.string() + "' does not exist");
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
}

template <typename T>
T field(const json& j, const char* name, const std::string& source) {
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(source + ": field '" + name + "': " + e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& source) {
  std::set<std::string> ok(known.begin(), known.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!ok.count(it.key())) throw ParseError(source + ": unknown field '" + it.key() + "'");
  }
}

std::vector<double> number_list(const json& j, const char* name, const std::string& source) {
  if (!j.contains(name)) return {};
  auto v = field<std::vector<double>>(j, name, source);
  if (v.empty()) throw ConfigError(source + ": grid axis '" + name + "' is empty");
  return v;
}

}  // namespace

DatasetManifest DatasetManifest::load(const fs::path& path) {
  const std::string source = path.string();
  const json j = parse_json(read_file(path), source);
  if (!j.is_object()) throw ParseError(source + ": top level must be an object");
  reject_unknown(j, {"images", "token_embeddings", "vocabulary", "encoder", "labelings"}, source);
  const fs::path base = path.parent_path();
  DatasetManifest m;
  m.images = resolve(base, field<std::string>(j, "images", source));
  m.token_embeddings = resolve(base, field<std::string>(j, "token_embeddings", source));
  m.vocabulary = resolve(base, field<std::string>(j, "vocabulary", source));
  if (j.contains("encoder")) {
    const json& e = j["encoder"];
    if (!e.is_object()) throw ParseError(source + ": field 'encoder' must be an object");
    reject_unknown(e, {"kind", "weights", "seed", "max_len"}, source + " encoder");
    if (e.value("kind", std::string("builtin")) != "builtin") {
      throw ConfigError(source + ": only builtin encoder weights can be declared in a manifest");
    }
    if (e.contains("weights")) m.encoder_weights = resolve(base, field<std::string>(e, "weights", source));
    if (e.contains("seed")) m.encoder_seed = field<std::uint64_t>(e, "seed", source);
    if (e.contains("max_len")) m.encoder_max_length = field<Index>(e, "max_len", source);
  }
  if (j.contains("labelings")) {
    for (const auto& l : j["labelings"]) {
      LabelingRef ref;
      ref.name = field<std::string>(l, "name", source);
      ref.path = resolve(base, field<std::string>(l, "path", source));
      ref.k = field<int>(l, "k", source);
      if (ref.k < 1) throw ConfigError(source + ": labeling '" + ref.name + "' has k < 1");
      m.labelings.push_back(std::move(ref));
    }
  }
  require_file(m.images, "image matrix");
  require_file(m.token_embeddings, "token embedding matrix");
  require_file(m.vocabulary, "vocabulary");
  for (const auto& l : m.labelings) require_file(l.path, "labeling");
  return m;
}

Dataset load_dataset(const DatasetManifest& manifest) {
  Dataset d;
  d.manifest = manifest;
  const RowMatrix images = read_embedding_matrix(manifest.images);
  d.table = load_token_table(manifest.token_embeddings, manifest.vocabulary);
  if (images.rows() == 0) throw ConfigError("image matrix is empty");
  if (images.cols() != d.table.dim()) {
    throw DimensionError("image dimension " + std::to_string(images.cols()) + " differs from token dimension " +
                         std::to_string(d.table.dim()));
  }
  d.images.reserve(static_cast<std::size_t>(images.rows()));
  for (Index i = 0; i < images.rows(); ++i) d.images.push_back(normalize(images.row(i).transpose()));
  return d;
}

GroundTruth load_ground_truth(const DatasetManifest& manifest, Index n) {
  GroundTruth g;
  for (const auto& ref : manifest.labelings) {
    Labeling l = read_labeling(ref.path);
    if (l.size() != n) {
      throw DimensionError("labeling '" + ref.name + "' has " + std::to_string(l.size()) + " entries, expected " +
                           std::to_string(n));
    }
    if (l.k() != ref.k) {
      throw ConfigError("labeling '" + ref.name + "' has " + std::to_string(l.k()) + " clusters, manifest says " +
                        std::to_string(ref.k));
    }
    g.names.push_back(ref.name);
    g.labelings.push_back(std::move(l));
  }
  return g;
}

HyperGrid HyperGrid::defaults() {
  HyperGrid g;
  g.learning_rates = {0.1, 0.05, 0.01, 0.005, 0.001, 0.0005};
  g.weight_decays = {0.0005, 0.0001, 0.00005, 0.00001, 0.0};
  for (int i = 0; i <= 10; ++i) {
    g.alphas.push_back(i / 10.0);
    g.betas.push_back(i / 10.0);
  }
  return g;
}

std::vector<HyperParams> HyperGrid::enumerate(const HyperParams& base) const {
  auto axis = [](const std::vector<double>& v, double fallback) {
    return v.empty() ? std::vector<double>{fallback} : v;
  };
  std::vector<HyperParams> out;
  for (double lr : axis(learning_rates, base.learning_rate))
    for (double wd : axis(weight_decays, base.weight_decay))
      for (double a : axis(alphas, base.alpha))
        for (double b : axis(betas, base.beta)) {
          HyperParams h = base;
          h.learning_rate = lr;
          h.weight_decay = wd;
          h.alpha = a;
          h.beta = b;
          out.push_back(h);
        }
  return out;
}

RunConfig RunConfig::parse(const std::string& text, const fs::path& base_dir) {
  const std::string source = "config";
  const json j = parse_json(text, source);
  if (!j.is_object()) throw ParseError(source + ": top level must be an object");
  reject_unknown(j,
                 {"dataset", "concepts", "hyper", "grid", "grid_scope", "variant", "backend", "seed", "restarts",
                  "kmeans_max_iters", "output", "parallel"},
                 source);
  RunConfig c;
  c.dataset = resolve(base_dir, field<std::string>(j, "dataset", source));
  if (j.contains("concepts")) {
    if (!j["concepts"].is_array()) throw ParseError(source + ": field 'concepts' must be an array");
    for (const auto& e : j["concepts"]) {
      ConceptEntry entry;
      if (e.is_string()) {
        entry.spec = resolve(base_dir, e.get<std::string>());
      } else {
        reject_unknown(e, {"spec", "clustering", "k"}, source + " concept");
        entry.spec = resolve(base_dir, field<std::string>(e, "spec", source));
        entry.clustering = e.value("clustering", std::string());
        entry.k = e.value("k", 0);
      }
      c.concepts.push_back(std::move(entry));
    }
  }
  if (j.contains("hyper")) {
    const json& h = j["hyper"];
    reject_unknown(h,
                   {"alpha", "beta", "lambda", "learning_rate", "weight_decay", "momentum", "beta2", "epsilon",
                    "iterations"},
                   source + " hyper");
    c.hyper.alpha = h.value("alpha", c.hyper.alpha);
    c.hyper.beta = h.value("beta", c.hyper.beta);
    c.hyper.lambda = h.value("lambda", c.hyper.lambda);
    c.hyper.learning_rate = h.value("learning_rate", c.hyper.learning_rate);
    c.hyper.weight_decay = h.value("weight_decay", c.hyper.weight_decay);
    c.hyper.momentum = h.value("momentum", c.hyper.momentum);
    c.hyper.beta2 = h.value("beta2", c.hyper.beta2);
    c.hyper.epsilon = h.value("epsilon", c.hyper.epsilon);
    c.hyper.iterations = h.value("iterations", c.hyper.iterations);
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    if (g.is_string() && g.get<std::string>() == "default") {
      c.grid = HyperGrid::defaults();
    } else if (g.is_object()) {
      reject_unknown(g, {"learning_rate", "weight_decay", "alpha", "beta"}, source + " grid");
      HyperGrid grid;
      grid.learning_rates = number_list(g, "learning_rate", source);
      grid.weight_decays = number_list(g, "weight_decay", source);
      grid.alphas = number_list(g, "alpha", source);
      grid.betas = number_list(g, "beta", source);
      c.grid = std::move(grid);
    } else {
      throw ParseError(source + ": field 'grid' must be \"default\" or an object of axes");
    }
  }
  if (j.contains("grid_scope")) {
    const auto scope = field<std::string>(j, "grid_scope", source);
    if (scope == "concept") c.grid_scope = GridScope::concept_level;
    else if (scope == "dataset") c.grid_scope = GridScope::dataset;
    else throw ConfigError(source + ": grid_scope must be 'concept' or 'dataset'");
  }
  if (j.contains("variant")) c.variant = parse_variant(field<std::string>(j, "variant", source));
  c.backend = j.value("backend", c.backend);
  c.seed = j.value("seed", c.seed);
  c.restarts = j.value("restarts", c.restarts);
  c.kmeans_max_iters = j.value("kmeans_max_iters", c.kmeans_max_iters);
  if (j.contains("output")) c.output_dir = resolve(base_dir, field<std::string>(j, "output", source));
  else c.output_dir = base_dir / "out";
  c.workers = j.value("parallel", c.workers);
  return c;
}

RunConfig RunConfig::load(const fs::path& path) {
  try {
    return parse(read_file(path), path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void RunConfig::validate() const {
  if (concepts.empty()) throw ConfigError("no concepts configured");
  require_file(dataset, "dataset manifest");
  for (const auto& c : concepts) require_file(c.spec, "concept spec");
  hyper.validate();
  if (restarts < 1) throw ConfigError("restarts must be at least 1");
  if (kmeans_max_iters < 1) throw ConfigError("kmeans_max_iters must be positive");
  if (workers < 1) throw ConfigError("parallel must be at least 1");
  if (backend != "builtin" && backend.rfind("remote:", 0) != 0) {
    throw ConfigError("backend must be 'builtin' or 'remote:URL', got '" + backend + "'");
  }
  if (grid && grid->enumerate(hyper).empty()) throw ConfigError("grid has no points");
}

EncoderPtr make_encoder(const std::string& backend, const DatasetManifest& manifest) {
  if (backend == "builtin") {
    if (manifest.encoder_weights) {
      return std::make_shared<BuiltinEncoder>(load_builtin_weights(*manifest.encoder_weights,
                                                                   manifest.encoder_max_length),
                                              "builtin(weights=" + manifest.encoder_weights->filename().string() + ")");
    }
    const TokenTable probe = load_token_table(manifest.token_embeddings, manifest.vocabulary);
    return std::make_shared<BuiltinEncoder>(
        BuiltinEncoder::from_seed(probe.dim(), manifest.encoder_seed, manifest.encoder_max_length));
  }
  if (backend.rfind("remote:", 0) == 0) {
    auto remote = std::make_shared<RemoteEncoder>(backend.substr(7));
    return std::make_shared<FiniteDifferenceEncoder>(std::move(remote));
  }
  throw ConfigError("unknown backend '" + backend + "'");
}

GridReport grid_search(const std::vector<UnitVector>& images, const ConceptSpec& spec,
                       const std::vector<HyperParams>& grid, const TextEncoder& encoder, const TokenTable& table,
                       const OptimizeOptions& options) {
  if (grid.empty()) throw ConfigError("grid search: empty grid");
  GridReport report;
  bool any = false;
  for (const auto& h : grid) {
    GridPoint p;
    p.hyper = h;
    try {
      p.mean_loss = optimize_all(images, spec, h, encoder, table, options).mean_final_loss;
      p.ok = true;
    } catch (const NumericalError& e) {
      p.error = e.what();
    }
    if (p.ok && (!any || p.mean_loss < report.points[report.best].mean_loss)) {
      report.best = report.points.size();
      any = true;
    }
    report.points.push_back(std::move(p));
  }
  if (!any) throw NumericalError("grid search: every grid point diverged for concept '" + spec.concept_word + "'");
  return report;
}

namespace {

struct Prepared {
  Dataset data;
  GroundTruth truth;
  EncoderPtr encoder;
};

Prepared prepare(const RunConfig& config) {
  config.validate();
  Prepared p;
  const auto manifest = DatasetManifest::load(config.dataset);
  p.data = load_dataset(manifest);
  p.truth = load_ground_truth(manifest, static_cast<Index>(p.data.images.size()));
  p.encoder = make_encoder(config.backend, manifest);
  if (p.encoder->dim() != p.data.table.dim()) {
    throw DimensionError("encoder dimension " + std::to_string(p.encoder->dim()) +
                         " differs from token dimension " + std::to_string(p.data.table.dim()));
  }
  return p;
}

int resolve_k(const ConceptEntry& entry, const ConceptSpec& spec, const DatasetManifest& manifest) {
  if (entry.k > 0) return entry.k;
  const std::string name = entry.clustering.empty() ? spec.concept_word : entry.clustering;
  for (const auto& l : manifest.labelings)
    if (l.name == name) return l.k;
  throw ConfigError("concept '" + spec.concept_word + "': no labeling named '" + name +
                    "' in the manifest and no explicit k");
}

// Fills hyper/grid on each result; results with errors are left untouched.
void apply_grid(const RunConfig& config, const Prepared& p, const std::vector<ConceptSpec>& specs,
                std::vector<ConceptResult>& results) {
  const auto points = config.grid->enumerate(config.hyper);
  const OptimizeOptions opts{config.variant, config.workers};
  for (std::size_t c = 0; c < results.size(); ++c) {
    if (!results[c].error.empty()) continue;
    try {
      results[c].grid = grid_search(p.data.images, specs[c], points, *p.encoder, p.data.table, opts);
      results[c].hyper = results[c].grid->best_hyper();
    } catch (const Error& e) {
      results[c].error = e.what();
      results[c].error_code = e.exit_code();
    }
  }
  if (config.grid_scope != GridScope::dataset) return;
  std::size_t best = 0;
  bool any = false;
  std::vector<double> total(points.size(), 0.0);
  std::vector<bool> ok(points.size(), true);
  for (const auto& r : results) {
    if (!r.grid) continue;
    for (std::size_t i = 0; i < points.size(); ++i) {
      ok[i] = ok[i] && r.grid->points[i].ok;
      total[i] += r.grid->points[i].mean_loss;
    }
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (ok[i] && (!any || total[i] < total[best])) {
      best = i;
      any = true;
    }
  }
  for (auto& r : results) {
    if (!r.grid) continue;
    r.grid->best = best;
    r.hyper = points[best];
  }
}

std::string file_stem(const std::string& concept_word) {
  std::string out;
  for (char ch : concept_word) out += (std::isalnum(static_cast<unsigned char>(ch)) ? ch : '_');
  return out;
}

}  // namespace

int PipelineResult::exit_code() const {
  for (const auto& c : concepts)
    if (!c.ok) return c.error_code ? c.error_code : 1;
  return 0;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<ConceptResult> run_grid_search(const RunConfig& config) {
  if (!config.grid) throw ConfigError("grid search requested but the config has no 'grid'");
  const Prepared p = prepare(config);
  std::vector<ConceptSpec> specs(config.concepts.size());
  std::vector<ConceptResult> results(config.concepts.size());
  for (std::size_t c = 0; c < config.concepts.size(); ++c) {
    try {
      specs[c] = load_concept_spec(config.concepts[c].spec, &p.data.table);
      results[c].concept_word = specs[c].concept_word;
      results[c].spec_hash = fnv1a_hex(read_file(config.concepts[c].spec));
    } catch (const Error& e) {
      results[c].concept_word = config.concepts[c].spec.stem().string();
      results[c].error = e.what();
      results[c].error_code = e.exit_code();
    }
  }
  apply_grid(config, p, specs, results);
  fs::create_directories(config.output_dir);
  for (auto& r : results) {
    r.ok = r.error.empty();
    if (r.grid) write_file_atomic(config.output_dir / ("grid_" + file_stem(r.concept_word) + ".csv"),
                                  format_grid_report(*r.grid));
  }
  return results;
}

PipelineResult run_pipeline(const RunConfig& config) {
  const Prepared p = prepare(config);
  PipelineResult result;
  result.backend = p.encoder->describe();
  result.seed = config.seed;
  result.variant = config.variant;
  result.truth_names = p.truth.names;

  std::vector<ConceptSpec> specs(config.concepts.size());
  result.concepts.resize(config.concepts.size());
  for (std::size_t c = 0; c < config.concepts.size(); ++c) {
    auto& r = result.concepts[c];
    r.hyper = config.hyper;
    r.hyper.seed = config.seed;
    try {
      specs[c] = load_concept_spec(config.concepts[c].spec, &p.data.table);
      r.concept_word = specs[c].concept_word;
      r.spec_hash = fnv1a_hex(read_file(config.concepts[c].spec));
      r.clustering = config.concepts[c].clustering.empty() ? r.concept_word : config.concepts[c].clustering;
      r.k = resolve_k(config.concepts[c], specs[c], p.data.manifest);
    } catch (const Error& e) {
      if (r.concept_word.empty()) r.concept_word = config.concepts[c].spec.stem().string();
      r.error = e.what();
      r.error_code = e.exit_code();
    }
  }
  if (config.grid) {
    apply_grid(config, p, specs, result.concepts);
    for (auto& r : result.concepts) r.hyper.seed = config.seed;
  }

  const OptimizeOptions opts{config.variant, config.workers};
  for (std::size_t c = 0; c < result.concepts.size(); ++c) {
    auto& r = result.concepts[c];
    if (!r.error.empty()) continue;
    try {
      r.batch = optimize_all(p.data.images, specs[c], r.hyper, *p.encoder, p.data.table, opts);
      r.restarts = kmeans_restarts(r.batch.proxies, r.k, config.restarts, config.seed, config.kmeans_max_iters,
                                   config.workers);
      for (const auto& truth : p.truth.labelings) r.metrics.push_back(summarize_restarts(r.restarts, truth));
      r.ok = true;
    } catch (const Error& e) {
      r.error = e.what();
      r.error_code = e.exit_code();
    }
  }

  std::vector<Labeling> predicted;
  for (const auto& r : result.concepts)
    if (r.ok) predicted.push_back(r.restarts.best_run().labels);
  result.cross = cross_clustering_matrix(predicted, p.truth.labelings);

  fs::create_directories(config.output_dir);
  for (const auto& r : result.concepts) {
    if (!r.ok) continue;
    const std::string stem = file_stem(r.concept_word);
    write_embedding_matrix(config.output_dir / ("proxies_" + stem + ".mmap"), r.batch.proxies);
    write_labeling(config.output_dir / ("labels_" + stem + ".txt"), r.restarts.best_run().labels);
    std::string refs = "image,word,score,initial_loss,final_loss\n";
    for (std::size_t i = 0; i < r.batch.references.size(); ++i) {
      char buf[128];
      std::snprintf(buf, sizeof buf, ",%.9g,%.9g,%.9g\n", r.batch.references[i].score, r.batch.initial_losses[static_cast<Index>(i)],
                    r.batch.final_losses[static_cast<Index>(i)]);
      refs += std::to_string(i) + "," + r.batch.references[i].word + buf;
    }
    write_file_atomic(config.output_dir / ("references_" + stem + ".csv"), refs);
    if (r.grid) write_file_atomic(config.output_dir / ("grid_" + stem + ".csv"), format_grid_report(*r.grid));
  }
  export_report(result, config.output_dir);
  write_file_atomic(config.output_dir / "run_manifest.txt", format_run_manifest(result));
  return result;
}

}  // namespace proxyclust
