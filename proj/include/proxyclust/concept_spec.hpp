#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "proxyclust/prompt.hpp"
#include "proxyclust/token_table.hpp"

namespace proxyclust {

// A user's concept u with its prompt template, candidate reference words
// {z_k}, and the sibling concepts {u_j} used as contrastive negatives.
struct ConceptSpec {
  std::string concept_word;
  PromptTemplate prompt;
  std::vector<std::string> candidates;
  std::vector<std::string> contrastive_concepts;  // empty disables the contrastive term

  // Structural checks: non-empty unique candidates, concept among contrastive
  // concepts when any are given. Throws ConfigError.
  void validate() const;
  // Every word the spec needs must be in the table. Throws UnknownTokenError.
  void validate_tokens(const TokenTable& table) const;

  Index target_index() const;  // position of concept_word in contrastive_concepts

  friend bool operator==(const ConceptSpec&, const ConceptSpec&) = default;
};

// JSON file:
//   {"concept": "color", "template": "fruit with the color of {}",
//    "candidates": ["red", ...], "contrastive_concepts": ["color", "species"]}
// "candidates" may be replaced by {"lexicon": {"path": ..., "count": 10, "seed": 0}}
// to draw reference words from a word list (relative paths resolve against
// the spec's directory). Passing a table also runs validate_tokens().
ConceptSpec parse_concept_spec(const std::string& text, const std::filesystem::path& base_dir = {},
                               const std::string& source = "<string>");
ConceptSpec load_concept_spec(const std::filesystem::path& path, const TokenTable* table = nullptr);
std::string serialize_concept_spec(const ConceptSpec& spec);
void save_concept_spec(const ConceptSpec& spec, const std::filesystem::path& path);

// n distinct words drawn uniformly without replacement; deterministic in seed.
std::vector<std::string> sample_words(const std::vector<std::string>& lexicon, std::size_t n, std::uint64_t seed);
// Lexicon file: one word per line; blank lines and duplicates are ignored.
std::vector<std::string> fallback_wordlist(const std::filesystem::path& lexicon_path, std::size_t n,
                                           std::uint64_t seed);

}  // namespace proxyclust
