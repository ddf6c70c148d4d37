#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace ukad::text {

// Tokens produced by tokenize(). Never holds an empty token.
class TokenSequence {
 public:
  TokenSequence() = default;
  explicit TokenSequence(std::vector<std::string> tokens);
  TokenSequence(std::initializer_list<std::string> tokens);

  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }
  auto begin() const noexcept { return tokens_.begin(); }
  auto end() const noexcept { return tokens_.end(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  // Tokens joined by single spaces.
  std::string joined() const;

  // Appends another sequence; used to build concatenated queries.
  void append(const TokenSequence& other);

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;

 private:
  std::vector<std::string> tokens_;
};

// Contiguous run of n tokens.
class NGram {
 public:
  explicit NGram(std::vector<std::string> tokens);

  std::size_t n() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  friend bool operator==(const NGram&, const NGram&) = default;
  friend auto operator<=>(const NGram&, const NGram&) = default;

 private:
  std::vector<std::string> tokens_;
};

// NFKC, lowercase, whitespace runs collapsed to one space, trimmed.
// Idempotent. Invalid UTF-8 sequences become U+FFFD.
std::string normalize(std::string_view raw);

// Normalizes, splits on whitespace, then detaches every punctuation or symbol
// code point as its own token. Letters, digits and combining marks stay
// together, so "17:45" -> ["17", ":", "45"].
TokenSequence tokenize(std::string_view text);

// All contiguous n-grams, in order. Throws std::invalid_argument for n == 0.
std::vector<NGram> ngrams(const TokenSequence& tokens, std::size_t n);

// Porter (1980) suffix-stripping stem. Tokens that are not purely ASCII
// lowercase letters, or shorter than three characters, are returned as-is.
std::string stem(std::string_view token);

}  // namespace ukad::text

template <>
struct std::hash<ukad::text::NGram> {
  std::size_t operator()(const ukad::text::NGram& g) const noexcept {
    std::size_t h = g.n();
    for (const auto& t : g.tokens()) {
      h ^= std::hash<std::string>{}(t) + 0x9e3779b97f4a7c15ULL + (h << 6) +
           (h >> 2);
    }
    return h;
  }
};
