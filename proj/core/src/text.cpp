#include "ukad/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <stdexcept>
#include <utility>

namespace ukad::text {

namespace {

const icu::Normalizer2& nfkc() {
  static const icu::Normalizer2* instance = [] {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFKCInstance(status);
    if (U_FAILURE(status)) {
      throw std::runtime_error(std::string("ICU NFKC unavailable: ") +
                               u_errorName(status));
    }
    return n;
  }();
  return *instance;
}

icu::UnicodeString nfkc_normalize(const icu::UnicodeString& s) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString out = nfkc().normalize(s, status);
  if (U_FAILURE(status)) {
    throw std::runtime_error(std::string("NFKC normalization failed: ") +
                             u_errorName(status));
  }
  return out;
}

bool is_space(UChar32 c) { return u_isUWhiteSpace(c) != 0; }

bool is_detached(UChar32 c) {
  return (U_GET_GC_MASK(c) & (U_GC_P_MASK | U_GC_S_MASK)) != 0;
}

}  // namespace

TokenSequence::TokenSequence(std::vector<std::string> tokens)
    : tokens_(std::move(tokens)) {
  for (const auto& t : tokens_) {
    if (t.empty()) throw std::invalid_argument("TokenSequence: empty token");
  }
}

TokenSequence::TokenSequence(std::initializer_list<std::string> tokens)
    : TokenSequence(std::vector<std::string>(tokens)) {}

std::string TokenSequence::joined() const {
  std::string out;
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens_[i];
  }
  return out;
}

void TokenSequence::append(const TokenSequence& other) {
  tokens_.insert(tokens_.end(), other.tokens_.begin(), other.tokens_.end());
}

NGram::NGram(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  if (tokens_.empty()) throw std::invalid_argument("NGram: n must be >= 1");
}

std::string normalize(std::string_view raw) {
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  s = nfkc_normalize(s);
  s.toLower(icu::Locale::getRoot());
  // Lowercasing can produce sequences that are no longer NFKC.
  s = nfkc_normalize(s);

  icu::UnicodeString collapsed;
  bool pending_space = false;
  for (int32_t i = 0; i < s.length();) {
    const UChar32 c = s.char32At(i);
    i += U16_LENGTH(c);
    if (is_space(c)) {
      pending_space = !collapsed.isEmpty();
      continue;
    }
    if (pending_space) {
      collapsed.append(static_cast<UChar>(u' '));
      pending_space = false;
    }
    collapsed.append(c);
  }
  std::string out;
  collapsed.toUTF8String(out);
  return out;
}

TokenSequence tokenize(std::string_view input) {
  const std::string norm = normalize(input);
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };

  const auto* bytes = reinterpret_cast<const uint8_t*>(norm.data());
  const int32_t length = static_cast<int32_t>(norm.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    const std::string_view piece(norm.data() + start,
                                 static_cast<std::size_t>(i - start));
    if (c >= 0 && is_space(c)) {
      flush();
    } else if (c >= 0 && is_detached(c)) {
      flush();
      tokens.emplace_back(piece);
    } else {
      current.append(piece);
    }
  }
  flush();
  return TokenSequence(std::move(tokens));
}

std::vector<NGram> ngrams(const TokenSequence& tokens, std::size_t n) {
  if (n == 0) throw std::invalid_argument("ngrams: n must be >= 1");
  std::vector<NGram> out;
  if (tokens.size() < n) return out;
  out.reserve(tokens.size() - n + 1);
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    out.emplace_back(std::vector<std::string>(tokens.begin() + i,
                                              tokens.begin() + i + n));
  }
  return out;
}

}  // namespace ukad::text
