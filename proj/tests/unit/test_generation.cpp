#include <gtest/gtest.h>

#include <cmath>

#include "ukad/errors.hpp"
#include "ukad/generation.hpp"

using namespace ukad;
using namespace ukad::generation;

namespace {

KnowledgeSnippet snippet(const std::string& doc, const std::string& body) {
  return {{"restaurant", "3", doc}, "Peking Restaurant", "q", body};
}

}  // namespace

TEST(Paragraphs, Split) {
  EXPECT_EQ(split_paragraphs("P1 line.\n\nP2 line."),
            (std::vector<std::string>{"P1 line.", "P2 line."}));
  EXPECT_EQ(split_paragraphs("single paragraph"), std::vector<std::string>{"single paragraph"});
  EXPECT_TRUE(split_paragraphs("\n\n").empty());
  EXPECT_EQ(split_paragraphs("a\nb"), std::vector<std::string>{"a\nb"});
  EXPECT_EQ(split_paragraphs("  a \n \t \n\n b\r\n\r\nc"),
            (std::vector<std::string>{"a", "b", "c"}));
}

TEST(Extract, SingleSnippet) {
  const std::vector<KnowledgeSnippet> one{snippet("1", "Peking Restaurant accepts cash only.")};
  EXPECT_EQ(extract_answer(one, 0).text, "Peking Restaurant accepts cash only.");
  const std::vector<KnowledgeSnippet> two_para{snippet("1", "First part.\n\nSecond part.")};
  EXPECT_EQ(extract_answer(two_para, 0).text, "First part.");
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_EQ(extract_answer(one, seed, {"d", 3}).text, "Peking Restaurant accepts cash only.");
  }
  EXPECT_THROW(extract_answer({}, 0), std::invalid_argument);
}

TEST(Extract, DeterministicChoice) {
  const std::vector<KnowledgeSnippet> two{snippet("1", "alpha"), snippet("2", "beta")};
  const auto a = extract_answer(two, 42, {"d", 3});
  EXPECT_EQ(extract_answer(two, 42, {"d", 3}), a);
  EXPECT_EQ(a.source, ResponseSource::Extracted);
  EXPECT_EQ(a.turn, (TurnKey{"d", 3}));
}

TEST(Extract, OutputIsSubstringOfExactlyOneBody) {
  const std::vector<KnowledgeSnippet> s{snippet("1", "one.\n\nmore"), snippet("2", "two"),
                                        snippet("3", "three three")};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto r = extract_answer(s, seed, {"d", 1});
    int hits = 0;
    for (const auto& sn : s) hits += sn.body.find(r.text) != std::string::npos ? 1 : 0;
    EXPECT_EQ(hits, 1) << r.text;
  }
}

// Chi-square goodness of fit over 10,000 seeds; 3 categories, df = 2, the
// 0.999 critical value is 13.82.
TEST(Extract, UniformOverSnippets) {
  const std::vector<KnowledgeSnippet> s{snippet("1", "a"), snippet("2", "b"), snippet("3", "c")};
  std::map<std::string, int> counts;
  const int n = 10000;
  for (int seed = 0; seed < n; ++seed) {
    ++counts[extract_answer(s, static_cast<std::uint64_t>(seed), {"d", 1}).text];
  }
  double chi2 = 0.0;
  const double expected = n / 3.0;
  for (const auto& [text, c] : counts) chi2 += std::pow(c - expected, 2) / expected;
  EXPECT_EQ(counts.size(), 3u);
  EXPECT_LT(chi2, 13.82);
}

TEST(ExternalResponses, ParseAndValidate) {
  const std::string four =
      "{\"dialogue_id\":\"d\",\"turn\":3,\"text\":\"a\"}\n"
      "{\"dialogue_id\":\"d\",\"turn\":7,\"text\":\"b\"}\n"
      "{\"dialogue_id\":\"d\",\"turn\":11,\"text\":\"c\"}\n"
      "{\"dialogue_id\":\"d\",\"turn\":15,\"text\":\"d\"}\n";
  const std::vector<TurnKey> targets{{"d", 3}, {"d", 7}, {"d", 11}, {"d", 15}};
  const auto r = parse_external_responses(four, "r", std::span<const TurnKey>(targets));
  ASSERT_EQ(r.size(), 4u);
  EXPECT_EQ(r[0].source, ResponseSource::External);
  EXPECT_THROW(parse_external_responses(four + "{\"dialogue_id\":\"d\",\"turn\":3,\"text\":\"x\"}\n", "r"),
               ParseError);
  EXPECT_THROW(parse_external_responses("{\"dialogue_id\":\"d\",\"turn\":3,\"text\":\"\"}", "r"),
               ParseError);
  const std::vector<TurnKey> more{{"d", 3}, {"d", 19}};
  EXPECT_THROW(parse_external_responses(four, "r", std::span<const TurnKey>(more)), DataError);
}

TEST(ExternalResponses, RoundTrip) {
  const std::vector<GeneratedResponse> r{{{"d", 3}, "hello \"there\"", ResponseSource::Extracted}};
  const auto back = parse_external_responses(responses_to_jsonl(r), "r");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].text, r[0].text);
  EXPECT_EQ(back[0].turn, r[0].turn);
}
