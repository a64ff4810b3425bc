#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace clarity {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;

/// Whitespace word vocabulary with fixed special ids. Token ids are assigned
/// by sorted insertion order at build time, so a vocabulary built from the
/// same texts is always identical.
class Vocab {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kUnk = 3;
  static constexpr const char* kTokenizerId = "whitespace-v1";

  Vocab();

  static Vocab build(const std::vector<std::string>& texts);

  /// Registers every word of `text` (used by builders and the stub backend).
  void absorb(std::string_view text);

  TokenSeq encode(std::string_view text) const;
  std::string decode(const TokenSeq& ids) const;

  TokenId id_of(const std::string& word) const;  // kUnk when missing
  const std::string& word_of(TokenId id) const;

  std::size_t size() const { return words_.size(); }

  const std::vector<std::string>& words() const { return words_; }
  /// Rebuild from an explicit word list (checkpoint loading). The list must
  /// start with the four special tokens.
  static Vocab from_words(std::vector<std::string> words);

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> index_;
  void push(std::string word);
};

}  // namespace clarity
