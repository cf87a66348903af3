#include "proxyclust/synthetic.hpp"

#include <set>

#include "json.hpp"
#include "proxyclust/errors.hpp"
#include "proxyclust/matrix_io.hpp"
#include "proxyclust/rng.hpp"

namespace proxyclust {

SyntheticSpec SyntheticSpec::fruit(std::uint64_t seed, double noise, Index n, Index dim) {
  SyntheticSpec s;
  s.n = n;
  s.dim = dim;
  s.noise = noise;
  s.seed = seed;
  s.encoder_seed = seed;
  s.aspects = {{"color", "fruit with the color of {}", {"red", "yellow", "green"}},
               {"species", "fruit of the species {}", {"apple", "banana", "grape", "cherry"}}};
  return s;
}

void SyntheticSpec::validate() const {
  if (aspects.empty()) throw ConfigError("synthetic spec: no aspects");
  if (n < 1) throw ConfigError("synthetic spec: n must be positive");
  if (!(noise >= 0.0)) throw ConfigError("synthetic spec: noise must be non-negative");
  Index combos = 1, needed = 1;
  std::set<std::string> names;
  for (const auto& a : aspects) {
    if (a.values.size() < 2) throw ConfigError("synthetic aspect '" + a.name + "' needs at least two values");
    if (!names.insert(a.name).second) throw ConfigError("synthetic spec: duplicate aspect '" + a.name + "'");
    combos *= static_cast<Index>(a.values.size());
    needed += static_cast<Index>(a.values.size()) - 1;
  }
  if (n % combos != 0) {
    throw ConfigError("synthetic spec: n = " + std::to_string(n) + " is not divisible by the " +
                      std::to_string(combos) + " aspect combinations");
  }
  if (dim < needed) {
    throw ConfigError("synthetic spec: dimension " + std::to_string(dim) + " cannot host the aspect subspaces (need " +
                      std::to_string(needed) + ")");
  }
}

namespace {

// Orthonormal basis of span(cols), dropping directions below tol.
Matrix orthonormal_basis(const Matrix& cols) {
  if (cols.cols() == 0) return Matrix(cols.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(cols, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  Index rank = 0;
  while (rank < sv.size() && sv[rank] > 1e-10 * std::max(1.0, sv[0])) ++rank;
  return svd.matrixU().leftCols(rank);
}

}  // namespace

SyntheticDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticDataset data;
  data.spec = spec;

  std::vector<std::string> vocab;
  std::set<std::string> seen;
  auto add = [&](const std::string& w) {
    if (seen.insert(w).second) vocab.push_back(w);
  };
  std::vector<PromptTemplate> prompts;
  for (const auto& a : spec.aspects) {
    prompts.push_back(PromptTemplate::parse(a.prompt_template));
    for (const auto& w : prompts.back().before_slot) add(w);
    for (const auto& w : prompts.back().after_slot) add(w);
    add(a.name);
    for (const auto& v : a.values) add(v);
  }
  data.table = TokenTable::random(vocab, spec.dim, derive_seed(spec.seed, 1));
  data.weights = generate_builtin_weights<double>(spec.dim, spec.encoder_seed, spec.max_length);
  const BuiltinEncoder encoder(data.weights);

  // Centered candidate prompt embeddings per aspect.
  std::vector<Matrix> centered;
  for (std::size_t a = 0; a < spec.aspects.size(); ++a) {
    const auto& values = spec.aspects[a].values;
    Matrix t(spec.dim, static_cast<Index>(values.size()));
    for (std::size_t k = 0; k < values.size(); ++k) {
      t.col(static_cast<Index>(k)) = encoder.encode(render_prompt(prompts[a], values[k], data.table)).values();
    }
    centered.push_back(t.colwise() - t.rowwise().mean());
  }

  std::vector<Matrix> codes;
  for (std::size_t a = 0; a < spec.aspects.size(); ++a) {
    Index other_cols = 0;
    for (std::size_t b = 0; b < centered.size(); ++b)
      if (b != a) other_cols += centered[b].cols();
    Matrix others(spec.dim, other_cols);
    for (std::size_t b = 0, c = 0; b < centered.size(); ++b) {
      if (b == a) continue;
      others.middleCols(static_cast<Index>(c), centered[b].cols()) = centered[b];
      c += static_cast<std::size_t>(centered[b].cols());
    }
    const Matrix basis = orthonormal_basis(others);
    const Matrix projected = centered[a] - basis * (basis.transpose() * centered[a]);
    const Index K = projected.cols();
    const Matrix target = Matrix::Identity(K, K) - Matrix::Constant(K, K, 1.0 / static_cast<double>(K));
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(projected.transpose());
    Matrix q = cod.solve(target);  // d x K, minimum-norm
    if ((projected.transpose() * q - target).norm() > 1e-6 * std::max(1.0, target.norm()) ||
        !q.allFinite()) {
      throw ConfigError("synthetic aspect '" + spec.aspects[a].name +
                        "': candidate prompts are not separable in dimension " + std::to_string(spec.dim));
    }
    for (Index k = 0; k < K; ++k) q.col(k).normalize();
    codes.push_back(std::move(q));
  }

  Rng noise_rng(derive_seed(spec.seed, 2));
  data.images.resize(spec.n, spec.dim);
  std::vector<std::vector<int>> labels(spec.aspects.size(), std::vector<int>(static_cast<std::size_t>(spec.n)));
  for (Index i = 0; i < spec.n; ++i) {
    Vector x = Vector::Zero(spec.dim);
    Index stride = 1;
    for (std::size_t a = 0; a < spec.aspects.size(); ++a) {
      const Index K = static_cast<Index>(spec.aspects[a].values.size());
      const Index value = (i / stride) % K;
      stride *= K;
      labels[a][static_cast<std::size_t>(i)] = static_cast<int>(value);
      x += codes[a].col(value);
    }
    for (Index j = 0; j < spec.dim; ++j) x[j] += spec.noise * noise_rng.normal();
    data.images.row(i) = normalize(x).values().transpose();
  }
  for (auto& l : labels) data.truths.emplace_back(l);

  std::vector<std::string> concept_words;
  for (const auto& a : spec.aspects) concept_words.push_back(a.name);
  for (std::size_t a = 0; a < spec.aspects.size(); ++a) {
    ConceptSpec c;
    c.concept_word = spec.aspects[a].name;
    c.prompt = prompts[a];
    c.candidates = spec.aspects[a].values;
    c.contrastive_concepts = concept_words;
    c.validate();
    data.concepts.push_back(std::move(c));
  }
  return data;
}

std::filesystem::path write_synthetic(const SyntheticDataset& data, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  write_embedding_matrix(dir / "images.mmap", data.images);
  save_token_table(data.table, dir / "tokens.mmap", dir / "vocab.txt");
  save_builtin_weights(data.weights, dir / "encoder");

  nlohmann::json manifest;
  manifest["images"] = "images.mmap";
  manifest["token_embeddings"] = "tokens.mmap";
  manifest["vocabulary"] = "vocab.txt";
  manifest["encoder"] = {{"kind", "builtin"}, {"weights", "encoder"}, {"max_len", data.spec.max_length}};
  manifest["labelings"] = nlohmann::json::array();
  nlohmann::json config;
  config["dataset"] = "manifest.json";
  config["concepts"] = nlohmann::json::array();
  for (std::size_t a = 0; a < data.spec.aspects.size(); ++a) {
    const auto& name = data.spec.aspects[a].name;
    write_labeling(dir / ("labels_" + name + ".txt"), data.truths[a]);
    save_concept_spec(data.concepts[a], dir / ("concept_" + name + ".json"));
    manifest["labelings"].push_back({{"name", name}, {"path", "labels_" + name + ".txt"}, {"k", data.truths[a].k()}});
    config["concepts"].push_back({{"spec", "concept_" + name + ".json"}, {"clustering", name}});
  }
  config["variant"] = "full";
  config["backend"] = "builtin";
  config["seed"] = data.spec.seed;
  config["restarts"] = kDefaultRestarts;
  config["output"] = "out";
  write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
  write_file_atomic(dir / "config.json", config.dump(2) + "\n");
  return dir / "manifest.json";
}

}  // namespace proxyclust
