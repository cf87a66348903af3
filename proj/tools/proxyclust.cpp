#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "proxyclust/errors.hpp"
#include "proxyclust/matrix_io.hpp"
#include "proxyclust/pipeline.hpp"
#include "proxyclust/reference_selection.hpp"
#include "proxyclust/synthetic.hpp"
#include "proxyclust/theory.hpp"

namespace fs = std::filesystem;
using namespace proxyclust;

namespace {

struct RunFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> backend;
  std::optional<std::string> out;
  std::optional<int> parallel;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "run config (JSON)")->required();
  cmd->add_option("--seed", f.seed, "override the config seed");
  cmd->add_option("--backend", f.backend, "builtin | remote:URL");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--parallel", f.parallel, "worker threads");
}

RunConfig load_config(const RunFlags& f) {
  RunConfig c = RunConfig::load(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.backend) c.backend = *f.backend;
  if (f.out) c.output_dir = *f.out;
  if (f.parallel) c.workers = *f.parallel;
  return c;
}

void report_failures(const std::vector<ConceptResult>& results) {
  for (const auto& r : results)
    if (!r.ok) std::cerr << "concept '" << r.concept_word << "' failed: " << r.error << "\n";
}

int cmd_cluster(const RunFlags& f) {
  const PipelineResult result = run_pipeline(load_config(f));
  std::cout << format_metrics_table(result);
  report_failures(result.concepts);
  return result.exit_code();
}

int cmd_grid_search(const RunFlags& f) {
  const auto results = run_grid_search(load_config(f));
  int code = 0;
  for (const auto& r : results) {
    if (!r.ok) {
      code = code ? code : (r.error_code ? r.error_code : 1);
      continue;
    }
    const auto& best = r.grid->points[r.grid->best];
    std::printf("%s lr=%g wd=%g alpha=%g beta=%g mean_loss=%.6f points=%zu\n", r.concept_word.c_str(),
                best.hyper.learning_rate, best.hyper.weight_decay, best.hyper.alpha, best.hyper.beta, best.mean_loss,
                r.grid->points.size());
  }
  report_failures(results);
  return code;
}

int cmd_select_ref(const RunFlags& f) {
  const RunConfig config = load_config(f);
  config.validate();
  const auto manifest = DatasetManifest::load(config.dataset);
  const Dataset data = load_dataset(manifest);
  const EncoderPtr encoder = make_encoder(config.backend, manifest);
  for (const auto& entry : config.concepts) {
    const ConceptSpec spec = load_concept_spec(entry.spec, &data.table);
    const CandidatePrompts prompts(spec, *encoder, data.table);
    std::string csv = "image,word,score\n";
    for (std::size_t i = 0; i < data.images.size(); ++i) {
      const auto ref = select_reference(static_cast<Index>(i), data.images[i], prompts, data.table);
      char buf[64];
      std::snprintf(buf, sizeof buf, ",%.9g\n", ref.score);
      csv += std::to_string(i) + "," + ref.word + buf;
    }
    if (f.out) {
      fs::create_directories(*f.out);
      write_file_atomic(fs::path(*f.out) / ("selection_" + spec.concept_word + ".csv"), csv);
    } else {
      std::cout << "# " << spec.concept_word << "\n" << csv;
    }
  }
  return 0;
}

struct BoundFlags {
  std::size_t trials = 10000;
  std::uint64_t seed = 0;
  int families = 10;
  std::size_t encoder_trials = 1000;
  Index dim = 8;
  std::string out;
};

int cmd_verify_bound(const BoundFlags& f) {
  std::vector<BoundReport> reports;
  reports.push_back(verify_theorem(sine_family(), f.trials, f.seed));
  for (int i = 0; i < f.families; ++i) {
    const auto s = derive_seed(f.seed, static_cast<std::uint64_t>(i));
    reports.push_back(verify_theorem(piecewise_linear_family(s), f.trials, derive_seed(s, 1)));
    reports.push_back(verify_theorem(smooth_family(s), f.trials, derive_seed(s, 2)));
  }
  if (f.encoder_trials > 0) {
    std::vector<std::string> vocab{"a", "photo", "of"};
    for (int i = 0; i < 16; ++i) vocab.push_back("t" + std::to_string(i));
    const TokenTable table = TokenTable::random(vocab, f.dim, derive_seed(f.seed, 100));
    const auto h = BuiltinEncoder::from_seed(f.dim, derive_seed(f.seed, 101));
    const auto g = BuiltinEncoder::from_seed(f.dim, derive_seed(f.seed, 102));
    EncoderFamilyOptions opts;
    opts.trials = f.encoder_trials;
    opts.seed = derive_seed(f.seed, 103);
    reports.push_back(encoder_family_check(h, g, table, PromptTemplate::parse("a photo of {}"), opts));
  }
  std::string json = "[\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    json += format_bound_report(reports[i]);
    json += i + 1 < reports.size() ? ",\n" : "\n";
  }
  json += "]\n";
  if (!f.out.empty()) write_file_atomic(f.out, json);
  std::cout << json;
  return 0;
}

struct SynthFlags {
  std::string out;
  std::uint64_t seed = 0;
  Index n = 300;
  Index dim = 64;
  double noise = 0.05;
  std::optional<std::uint64_t> encoder_seed;
};

int cmd_synth(const SynthFlags& f) {
  SyntheticSpec spec = SyntheticSpec::fruit(f.seed, f.noise, f.n, f.dim);
  if (f.encoder_seed) spec.encoder_seed = *f.encoder_seed;
  const auto manifest = write_synthetic(generate_synthetic(spec), f.out);
  std::cout << manifest.string() << "\n";
  return 0;
}

int cmd_metrics(const std::vector<std::string>& preds, const std::vector<std::string>& truths) {
  std::vector<Labeling> p, t;
  for (const auto& path : preds) p.push_back(read_labeling(path));
  for (const auto& path : truths) t.push_back(read_labeling(path));
  const CrossClustering cross = cross_clustering_matrix(p, t);
  std::printf("pred,truth,nmi,ri\n");
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < t.size(); ++j)
      std::printf("%s,%s,%.6f,%.6f\n", preds[i].c_str(), truths[j].c_str(),
                  cross.nmi(static_cast<Index>(i), static_cast<Index>(j)),
                  cross.ri(static_cast<Index>(i), static_cast<Index>(j)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustering conditioned on a user concept via learned text proxies"};
  app.require_subcommand(1);

  RunFlags cluster_flags, grid_flags, select_flags;
  auto* cluster = app.add_subcommand("cluster", "optimize proxies and cluster them");
  add_run_flags(cluster, cluster_flags);
  auto* grid = app.add_subcommand("grid-search", "pick hyperparameters by mean final objective");
  add_run_flags(grid, grid_flags);
  auto* select = app.add_subcommand("select-ref", "print the selected reference word per image");
  add_run_flags(select, select_flags);

  BoundFlags bound_flags;
  auto* bound = app.add_subcommand("verify-bound", "check the nearest-token gap bound numerically");
  bound->add_option("--trials", bound_flags.trials, "samples per scalar family");
  bound->add_option("--seed", bound_flags.seed);
  bound->add_option("--families", bound_flags.families, "random families of each kind");
  bound->add_option("--encoder-trials", bound_flags.encoder_trials, "0 skips the encoder family");
  bound->add_option("--dim", bound_flags.dim, "encoder family dimension");
  bound->add_option("--out", bound_flags.out, "also write the JSON report here");

  SynthFlags synth_flags;
  auto* synth = app.add_subcommand("synth", "write the synthetic fruit dataset");
  synth->add_option("--out", synth_flags.out)->required();
  synth->add_option("--seed", synth_flags.seed);
  synth->add_option("--n", synth_flags.n);
  synth->add_option("--dim", synth_flags.dim);
  synth->add_option("--noise", synth_flags.noise);
  synth->add_option("--encoder-seed", synth_flags.encoder_seed);

  std::vector<std::string> preds, truths;
  auto* metrics = app.add_subcommand("metrics", "NMI and RI between labelings");
  metrics->add_option("--pred", preds, "predicted labeling file")->required();
  metrics->add_option("--truth", truths, "ground-truth labeling file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*cluster) return cmd_cluster(cluster_flags);
    if (*grid) return cmd_grid_search(grid_flags);
    if (*select) return cmd_select_ref(select_flags);
    if (*bound) return cmd_verify_bound(bound_flags);
    if (*synth) return cmd_synth(synth_flags);
    if (*metrics) return cmd_metrics(preds, truths);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
