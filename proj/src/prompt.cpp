#include "proxyclust/prompt.hpp"

#include "proxyclust/errors.hpp"

namespace proxyclust {

namespace {
constexpr std::string_view kSlotMarker = "{}";
constexpr const char* kProxyWord = "*";
}  // namespace

PromptTemplate PromptTemplate::parse(std::string_view text) {
  PromptTemplate out;
  bool seen_slot = false;
  for (auto& word : tokenize(text)) {
    if (word == kSlotMarker) {
      if (seen_slot) throw ParseError("template '" + std::string(text) + "': more than one '{}' slot");
      seen_slot = true;
    } else if (word.find(kSlotMarker) != std::string::npos) {
      throw ParseError("template '" + std::string(text) + "': '{}' must be a separate word");
    } else {
      (seen_slot ? out.after_slot : out.before_slot).push_back(std::move(word));
    }
  }
  if (!seen_slot) throw ParseError("template '" + std::string(text) + "': missing '{}' slot");
  return out;
}

std::vector<std::string> PromptTemplate::render_words(const std::string& filler) const {
  std::vector<std::string> words(before_slot);
  words.push_back(filler);
  words.insert(words.end(), after_slot.begin(), after_slot.end());
  return words;
}

std::string PromptTemplate::text() const {
  std::string out;
  for (const auto& w : render_words(std::string(kSlotMarker))) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

TokenSequence TokenSequence::with_proxy(const Vector& proxy) const {
  if (!slot_index) throw ConfigError("token sequence has no proxy slot");
  if (proxy.size() != dim()) {
    throw DimensionError("proxy has dimension " + std::to_string(proxy.size()) + ", sequence has " +
                         std::to_string(dim()));
  }
  TokenSequence out = *this;
  out.embeddings.col(*slot_index) = proxy;
  out.words[static_cast<std::size_t>(*slot_index)] = kProxyWord;
  out.slot_is_proxy = true;
  return out;
}

TokenSequence render_prompt(const PromptTemplate& prompt, const std::string& word, const TokenTable& table) {
  TokenSequence seq;
  seq.words = prompt.render_words(word);
  seq.embeddings.resize(table.dim(), prompt.length());
  for (std::size_t s = 0; s < seq.words.size(); ++s) {
    seq.embeddings.col(static_cast<Index>(s)) = table.embeddings().row(table.index_of(seq.words[s])).transpose();
  }
  seq.slot_index = prompt.slot_index();
  return seq;
}

TokenSequence render_prompt_with_proxy(const PromptTemplate& prompt, const Vector& proxy, const TokenTable& table) {
  if (proxy.size() != table.dim()) {
    throw DimensionError("proxy has dimension " + std::to_string(proxy.size()) + ", table has " +
                         std::to_string(table.dim()));
  }
  TokenSequence seq;
  seq.words = prompt.render_words(kProxyWord);
  seq.embeddings.resize(table.dim(), prompt.length());
  for (std::size_t s = 0; s < seq.words.size(); ++s) {
    const auto col = static_cast<Index>(s);
    if (col == prompt.slot_index()) {
      seq.embeddings.col(col) = proxy;
    } else {
      seq.embeddings.col(col) = table.embeddings().row(table.index_of(seq.words[s])).transpose();
    }
  }
  seq.slot_index = prompt.slot_index();
  seq.slot_is_proxy = true;
  return seq;
}

}  // namespace proxyclust
