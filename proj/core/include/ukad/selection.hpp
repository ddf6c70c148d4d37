#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ukad/corpus.hpp"
#include "ukad/text.hpp"

namespace ukad::selection {

// Set of snippets a turn is scored against. Global covers the whole base and
// is only used for detected turns that carry no annotation to scope by.
struct CandidateScope {
  enum class Kind { DomainLevel, EntityLevel, Global };

  Kind kind = Kind::Global;
  std::string domain;
  std::optional<std::string> entity_id;

  static CandidateScope domain_level(std::string domain);
  static CandidateScope entity_level(std::string domain, std::string entity_id);
  static CandidateScope global();
  // Scope a gold key is evaluated in: its entity, or its domain's FAQs.
  static CandidateScope of(const KnowledgeKey& key);

  std::string to_string() const;

  friend bool operator==(const CandidateScope&, const CandidateScope&) = default;
  friend auto operator<=>(const CandidateScope&, const CandidateScope&) = default;
};

struct CandidateDocument {
  KnowledgeKey key;
  text::TokenSequence text;  // entity name (if any) + title + body
};

// Entity-level candidates get the entity name prepended to their text.
std::vector<CandidateDocument> build_candidates(const KnowledgeBase& kb,
                                                const CandidateScope& scope);

// Immutable term statistics over a candidate list.
class TermIndex {
 public:
  struct Posting {
    std::size_t term;
    double count;
  };

  // Throws ValidationError on an empty candidate list.
  static TermIndex build(std::span<const CandidateDocument> docs);

  std::size_t num_docs() const noexcept { return keys_.size(); }
  std::size_t vocabulary_size() const noexcept { return terms_.size(); }
  std::optional<std::size_t> term_id(const std::string& term) const;
  const std::string& term(std::size_t id) const { return terms_.at(id); }
  std::size_t df(std::size_t id) const { return df_.at(id); }
  std::size_t df(const std::string& term) const;
  double length(std::size_t doc) const { return lengths_.at(doc); }
  double average_length() const noexcept { return avg_length_; }
  const KnowledgeKey& key(std::size_t doc) const { return keys_.at(doc); }
  // Sorted by term id.
  const std::vector<Posting>& postings(std::size_t doc) const {
    return postings_.at(doc);
  }

 private:
  std::map<std::string, std::size_t> vocabulary_;
  std::vector<std::string> terms_;  // id -> term, first-seen order
  std::vector<std::size_t> df_;
  std::vector<KnowledgeKey> keys_;
  std::vector<std::vector<Posting>> postings_;
  std::vector<double> lengths_;
  double avg_length_ = 0.0;
};

struct ScoredCandidate {
  KnowledgeKey key;
  double score = 0.0;

  friend bool operator==(const ScoredCandidate&, const ScoredCandidate&) = default;
};

// Candidates ordered by (score desc, key asc).
struct Ranking {
  TurnKey turn;
  std::vector<ScoredCandidate> items;

  static Ranking sorted(TurnKey turn, std::vector<ScoredCandidate> items);

  bool empty() const noexcept { return items.empty(); }
  std::size_t size() const noexcept { return items.size(); }

  friend bool operator==(const Ranking&, const Ranking&) = default;
};

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

// Concatenation of all context turns, both speakers, oldest first.
text::TokenSequence query_tokens(const DialogueContext& context);

// Cosine between raw-tf x smoothed-idf vectors, idf = ln((1+N)/(1+df)) + 1.
// Out-of-vocabulary query terms are ignored.
Ranking score_tfidf(const TermIndex& index, const DialogueContext& context,
                    TurnKey turn = {});
Ranking score_tfidf(const TermIndex& index, const text::TokenSequence& query,
                    TurnKey turn = {});

// Okapi BM25 with idf = ln((N - df + 0.5) / (df + 0.5) + 1); repeated query
// terms count once per occurrence.
Ranking score_bm25(const TermIndex& index, const DialogueContext& context,
                   const Bm25Params& params = {}, TurnKey turn = {});
Ranking score_bm25(const TermIndex& index, const text::TokenSequence& query,
                   const Bm25Params& params = {}, TurnKey turn = {});

const KnowledgeKey& select_top1(const Ranking& ranking);

// Every candidate scoring >= threshold, or the top candidate when none does.
std::vector<KnowledgeKey> select_above(const Ranking& ranking, double threshold);

inline constexpr int kDefaultNegatives = 5;

struct NegativeSample {
  std::vector<KnowledgeKey> negatives;
  bool insufficient = false;  // fewer than m candidates were available
};

// Draws up to m distinct keys uniformly without replacement from the
// positive's scope (same entity, or same domain's FAQs), excluding it.
NegativeSample sample_negatives(const KnowledgeBase& kb,
                                const KnowledgeKey& positive,
                                int m = kDefaultNegatives,
                                std::uint64_t seed = 0);

// Reads JSON lines {dialogue_id, turn, domain, entity_id?, doc_id, score} and
// builds one Ranking per turn in `scopes`. Every candidate of a turn's scope
// must be scored; rows for other turns or out-of-scope keys are ignored.
// External scores must lie in [0, 1]; `unit_scores = false` accepts the
// unbounded output of the `select` command.
std::vector<Ranking> ingest_external_selection_scores(
    const std::filesystem::path& path, const KnowledgeBase& kb,
    const std::map<TurnKey, CandidateScope>& scopes, bool unit_scores = true);
std::vector<Ranking> parse_external_selection_scores(
    const std::string& text, const std::string& source, const KnowledgeBase& kb,
    const std::map<TurnKey, CandidateScope>& scopes, bool unit_scores = true);

}  // namespace ukad::selection
