#include "proxyclust/reference_selection.hpp"

#include "proxyclust/errors.hpp"

namespace proxyclust {

CandidatePrompts::CandidatePrompts(const ConceptSpec& spec, const TextEncoder& encoder, const TokenTable& table)
    : words_(spec.candidates) {
  if (words_.empty()) throw ConfigError("concept '" + spec.concept_word + "' has no candidate words");
  embeddings_.reserve(words_.size());
  for (const auto& word : words_) embeddings_.push_back(encoder.encode(render_prompt(spec.prompt, word, table)));
}

Vector CandidatePrompts::scores(const UnitVector& image) const {
  Vector s(size());
  for (Index k = 0; k < size(); ++k) s[k] = dot(image, embeddings_[static_cast<std::size_t>(k)]);
  return s;
}

Vector score_candidates(const UnitVector& image, const ConceptSpec& spec, const TextEncoder& encoder,
                        const TokenTable& table) {
  return CandidatePrompts(spec, encoder, table).scores(image);
}

Index argmax_first(const Vector& scores) {
  if (scores.size() == 0) throw ConfigError("argmax of an empty score list");
  Index best = 0;
  for (Index k = 1; k < scores.size(); ++k)
    if (scores[k] > scores[best]) best = k;
  return best;
}

SelectedReference select_reference(Index image_index, const UnitVector& image, const CandidatePrompts& prompts,
                                   const TokenTable& table) {
  const Vector s = prompts.scores(image);
  SelectedReference ref;
  ref.image_index = image_index;
  ref.candidate_index = argmax_first(s);
  ref.word = prompts.words()[static_cast<std::size_t>(ref.candidate_index)];
  ref.token_embedding = table.lookup(ref.word);
  ref.score = s[ref.candidate_index];
  return ref;
}

SelectedReference select_reference(Index image_index, const UnitVector& image, const ConceptSpec& spec,
                                   const TextEncoder& encoder, const TokenTable& table) {
  if (spec.candidates.empty()) throw ConfigError("concept '" + spec.concept_word + "' has no candidate words");
  return select_reference(image_index, image, CandidatePrompts(spec, encoder, table), table);
}

}  // namespace proxyclust
