#include "clarity/tokenizer.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "clarity/util.hpp"

namespace clarity {

Vocab::Vocab() {
  push("<pad>");
  push("<bos>");
  push("<eos>");
  push("<unk>");
}

void Vocab::push(std::string word) {
  index_.emplace(word, static_cast<TokenId>(words_.size()));
  words_.push_back(std::move(word));
}

Vocab Vocab::build(const std::vector<std::string>& texts) {
  std::set<std::string> seen;
  for (const auto& text : texts)
    for (auto& w : split_words(text)) seen.insert(std::move(w));
  Vocab v;
  for (const auto& w : seen) v.absorb(w);
  return v;
}

void Vocab::absorb(std::string_view text) {
  for (auto& w : split_words(text))
    if (!index_.contains(w)) push(std::move(w));
}

TokenSeq Vocab::encode(std::string_view text) const {
  TokenSeq ids;
  for (const auto& w : split_words(text)) ids.push_back(id_of(w));
  return ids;
}

std::string Vocab::decode(const TokenSeq& ids) const {
  std::vector<std::string> words;
  for (TokenId id : ids) {
    if (id == kPad || id == kBos || id == kEos) continue;
    words.push_back(word_of(id));
  }
  return join_words(words);
}

TokenId Vocab::id_of(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::word_of(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size())
    throw std::out_of_range("token id out of range");
  return words_[static_cast<std::size_t>(id)];
}

Vocab Vocab::from_words(std::vector<std::string> words) {
  if (words.size() < 4 || words[0] != "<pad>" || words[1] != "<bos>" ||
      words[2] != "<eos>" || words[3] != "<unk>")
    throw std::runtime_error("vocab word list missing special tokens");
  Vocab v;
  for (std::size_t i = 4; i < words.size(); ++i) v.absorb(words[i]);
  return v;
}

}  // namespace clarity
