#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "proxyclust/builtin_encoder.hpp"
#include "proxyclust/clustering.hpp"
#include "proxyclust/concept_spec.hpp"

namespace proxyclust {

struct AspectSpec {
  std::string name;             // doubles as the concept word
  std::string prompt_template;  // e.g. "fruit with the color of {}"
  std::vector<std::string> values;
};

struct SyntheticSpec {
  Index n = 300;
  Index dim = 64;
  std::vector<AspectSpec> aspects;
  double noise = 0.05;  // per-coordinate Gaussian std before normalization
  std::uint64_t seed = 0;
  std::uint64_t encoder_seed = 0;
  Index max_length = kDefaultMaxLength;

  // color {red, yellow, green} x species {apple, banana, grape, cherry}
  static SyntheticSpec fruit(std::uint64_t seed = 0, double noise = 0.05, Index n = 300, Index dim = 64);
  void validate() const;  // throws ConfigError
};

// Image embeddings x_i = normalize(sum_a code(a, value_a(i)) + noise). For each
// aspect, code vectors lie in the span of that aspect's centered candidate
// prompt embeddings projected off every other aspect's span, and are chosen so
// that <code_k, t_j> - <code_k, t_k> < 0 for j != k. Item i takes value
// (i / stride_a) % |values_a| of aspect a.
struct SyntheticDataset {
  SyntheticSpec spec;
  TokenTable table;
  BuiltinWeights weights;
  RowMatrix images;  // rows unit-norm
  std::vector<Labeling> truths;  // one per aspect
  std::vector<ConceptSpec> concepts;
};

SyntheticDataset generate_synthetic(const SyntheticSpec& spec);

// Writes images.mmap, tokens.mmap, vocab.txt, encoder/, labels_<aspect>.txt,
// concept_<aspect>.json, manifest.json and config.json into `dir`. Returns the
// manifest path.
std::filesystem::path write_synthetic(const SyntheticDataset& data, const std::filesystem::path& dir);

}  // namespace proxyclust
