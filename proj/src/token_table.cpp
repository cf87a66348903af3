#include "proxyclust/token_table.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

#include "proxyclust/errors.hpp"
#include "proxyclust/rng.hpp"

namespace proxyclust {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

TokenTable::TokenTable(std::vector<std::string> vocabulary, RowMatrix embeddings)
    : vocabulary_(std::move(vocabulary)), embeddings_(std::move(embeddings)) {
  if (static_cast<Index>(vocabulary_.size()) != embeddings_.rows()) {
    throw DimensionError("token table: " + std::to_string(vocabulary_.size()) + " words but " +
                         std::to_string(embeddings_.rows()) + " embedding rows");
  }
  index_.reserve(vocabulary_.size());
  for (std::size_t i = 0; i < vocabulary_.size(); ++i) {
    if (vocabulary_[i].empty()) throw ConfigError("token table: empty word at row " + std::to_string(i));
    if (!index_.emplace(vocabulary_[i], static_cast<Index>(i)).second) {
      throw ConfigError("token table: duplicate word '" + vocabulary_[i] + "'");
    }
  }
}

TokenTable TokenTable::random(std::vector<std::string> vocabulary, Index dim, std::uint64_t seed) {
  if (dim <= 0) throw ConfigError("token table: dimension must be positive");
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  RowMatrix emb(static_cast<Index>(vocabulary.size()), dim);
  for (Index r = 0; r < emb.rows(); ++r)
    for (Index c = 0; c < dim; ++c) emb(r, c) = static_cast<float>(rng.uniform(-bound, bound));
  return TokenTable(std::move(vocabulary), std::move(emb));
}

bool TokenTable::contains(std::string_view word) const { return index_.count(std::string(word)) > 0; }

Index TokenTable::index_of(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) throw UnknownTokenError(std::string(word));
  return it->second;
}

Vector TokenTable::lookup(std::string_view word) const { return embeddings_.row(index_of(word)).transpose(); }

}  // namespace proxyclust
