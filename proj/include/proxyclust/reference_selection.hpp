#pragma once

#include <string>
#include <vector>

#include "proxyclust/concept_spec.hpp"
#include "proxyclust/encoder.hpp"

namespace proxyclust {

// Encoded candidate prompts t_k = h("<template with z_k>"), computed once per spec.
class CandidatePrompts {
 public:
  CandidatePrompts(const ConceptSpec& spec, const TextEncoder& encoder, const TokenTable& table);

  const std::vector<std::string>& words() const noexcept { return words_; }
  const std::vector<UnitVector>& embeddings() const noexcept { return embeddings_; }
  Index size() const noexcept { return static_cast<Index>(words_.size()); }

  // score_k = <image, t_k>
  Vector scores(const UnitVector& image) const;

 private:
  std::vector<std::string> words_;
  std::vector<UnitVector> embeddings_;
};

struct SelectedReference {
  Index image_index = 0;
  Index candidate_index = 0;
  std::string word;         // z_i
  Vector token_embedding;   // phi(z_i)
  double score = 0.0;
};

Vector score_candidates(const UnitVector& image, const ConceptSpec& spec, const TextEncoder& encoder,
                        const TokenTable& table);

// First index attaining the maximum. Throws ConfigError on an empty vector.
Index argmax_first(const Vector& scores);

SelectedReference select_reference(Index image_index, const UnitVector& image, const CandidatePrompts& prompts,
                                   const TokenTable& table);
SelectedReference select_reference(Index image_index, const UnitVector& image, const ConceptSpec& spec,
                                   const TextEncoder& encoder, const TokenTable& table);

}  // namespace proxyclust
