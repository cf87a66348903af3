#pragma once

#include <memory>
#include <vector>

#include "oracles.hpp"
#include "proxyclust/concept_spec.hpp"
#include "proxyclust/objective.hpp"

namespace fixture {

using namespace proxyclust;

struct RandomCase {
  std::shared_ptr<BuiltinEncoder> encoder;
  TokenTable table;
  ConceptSpec spec;
  std::vector<UnitVector> images;
};

inline RandomCase random_case(std::uint64_t seed, Index dim, std::size_t n_images = 1) {
  RandomCase c;
  Rng rng(seed);
  std::vector<std::string> vocab{"a", "photo", "of", "shape", "color", "size"};
  for (int i = 0; i < 6; ++i) vocab.push_back("w" + std::to_string(i));
  c.table = TokenTable::random(vocab, dim, derive_seed(seed, 1));
  c.encoder = std::make_shared<BuiltinEncoder>(BuiltinEncoder::from_seed(dim, derive_seed(seed, 2)));
  c.spec.concept_word = "color";
  c.spec.prompt = PromptTemplate::parse(rng.below(2) ? "a photo of {}" : "a {} photo");
  const auto picks = rng.sample_without_replacement(6, 2 + static_cast<std::size_t>(rng.below(4)));
  for (auto p : picks) c.spec.candidates.push_back("w" + std::to_string(p));
  c.spec.contrastive_concepts = {"shape", "color", "size"};
  for (std::size_t i = 0; i < n_images; ++i) {
    Vector x(dim);
    for (Index j = 0; j < dim; ++j) x[j] = rng.normal();
    c.images.push_back(normalize(x));
  }
  return c;
}

// Oracle objective assembled straight from the weighting rules of each variant.
inline oracle::Objective oracle_objective(const RandomCase& c, const UnitVector& image, const std::string& reference,
                                          const HyperParams& h, Variant v) {
  oracle::Objective o;
  o.encoder = &c.encoder->weights();
  const Vector u = c.table.lookup(c.spec.concept_word);
  o.prompt = render_prompt_with_proxy(c.spec.prompt, u, c.table).embeddings;
  o.slot = c.spec.prompt.slot_index();
  o.image = image.values();
  o.weight_decay = h.weight_decay;
  const Vector z = c.table.lookup(reference);
  switch (v) {
    case Variant::proxy:
      break;
    case Variant::concept_level:
      o.anchor = u;
      o.alpha = h.alpha;
      break;
    case Variant::reference:
      o.anchor = z;
      o.alpha = h.alpha;
      break;
    case Variant::concept_reference:
      o.anchor = z;
      o.alpha = h.alpha;
      o.concept_anchor = u;
      o.concept_anchor_weight = h.beta;
      break;
    case Variant::full:
      o.anchor = z;
      o.alpha = h.alpha;
      o.concepts.resize(c.table.dim(), 3);
      for (Index j = 0; j < 3; ++j) o.concepts.col(j) = c.table.lookup(c.spec.contrastive_concepts[static_cast<std::size_t>(j)]);
      o.target = 1;
      o.beta = h.beta;
      break;
  }
  return o;
}

inline Vector random_point(Rng& rng, Index dim, double scale) {
  Vector w(dim);
  for (Index j = 0; j < dim; ++j) w[j] = scale * rng.normal();
  return w;
}

}  // namespace fixture
