#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "proxyclust/types.hpp"

namespace proxyclust {

// Lowercase, whitespace-split tokenization; one word is one token.
std::vector<std::string> tokenize(std::string_view text);

// The word -> token-embedding map. Rows of `embeddings()` follow `vocabulary()`.
class TokenTable {
 public:
  TokenTable() = default;
  TokenTable(std::vector<std::string> vocabulary, RowMatrix embeddings);

  // Entries uniform in [-1/sqrt(d), 1/sqrt(d)], rounded to float precision so
  // the table survives the 32-bit matrix file format bit-exactly.
  static TokenTable random(std::vector<std::string> vocabulary, Index dim, std::uint64_t seed);

  Index dim() const noexcept { return embeddings_.cols(); }
  Index size() const noexcept { return embeddings_.rows(); }
  const std::vector<std::string>& vocabulary() const noexcept { return vocabulary_; }
  const RowMatrix& embeddings() const noexcept { return embeddings_; }

  bool contains(std::string_view word) const;
  Index index_of(std::string_view word) const;  // throws UnknownTokenError
  Vector lookup(std::string_view word) const;   // throws UnknownTokenError

 private:
  std::vector<std::string> vocabulary_;
  RowMatrix embeddings_;
  std::unordered_map<std::string, Index> index_;
};

inline Vector lookup_token(const TokenTable& table, std::string_view word) { return table.lookup(word); }

}  // namespace proxyclust
