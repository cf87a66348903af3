#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "proxyclust/token_table.hpp"
#include "proxyclust/types.hpp"

namespace proxyclust {

// A prompt with exactly one proxy slot, written as "{}" in template text.
struct PromptTemplate {
  std::vector<std::string> before_slot;
  std::vector<std::string> after_slot;

  static PromptTemplate parse(std::string_view text);  // throws ParseError

  Index slot_index() const noexcept { return static_cast<Index>(before_slot.size()); }
  Index length() const noexcept { return static_cast<Index>(before_slot.size() + after_slot.size() + 1); }
  std::vector<std::string> render_words(const std::string& filler) const;
  std::string text() const;  // inverse of parse()

  friend bool operator==(const PromptTemplate&, const PromptTemplate&) = default;
};

// Token embeddings as columns (d x S), the words they came from, and the
// position of the learnable slot if any.
struct TokenSequence {
  Matrix embeddings;
  std::vector<std::string> words;
  std::optional<Index> slot_index;
  // True once the slot column holds a free proxy vector instead of a token row.
  bool slot_is_proxy = false;

  Index length() const noexcept { return embeddings.cols(); }
  Index dim() const noexcept { return embeddings.rows(); }

  // Copy with the slot column replaced by `proxy`. Requires a slot.
  TokenSequence with_proxy(const Vector& proxy) const;
};

TokenSequence render_prompt(const PromptTemplate& prompt, const std::string& word, const TokenTable& table);

// Renders the template with the slot filled by a raw embedding.
TokenSequence render_prompt_with_proxy(const PromptTemplate& prompt, const Vector& proxy, const TokenTable& table);

}  // namespace proxyclust
