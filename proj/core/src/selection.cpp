#include "ukad/selection.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "json_util.hpp"
#include "ukad/errors.hpp"
#include "ukad/random.hpp"

namespace ukad::selection {

using detail::Json;

CandidateScope CandidateScope::domain_level(std::string domain) {
  return {Kind::DomainLevel, std::move(domain), std::nullopt};
}

CandidateScope CandidateScope::entity_level(std::string domain,
                                            std::string entity_id) {
  return {Kind::EntityLevel, std::move(domain), std::move(entity_id)};
}

CandidateScope CandidateScope::global() { return {}; }

CandidateScope CandidateScope::of(const KnowledgeKey& key) {
  return key.entity_id ? entity_level(key.domain, *key.entity_id)
                       : domain_level(key.domain);
}

std::string CandidateScope::to_string() const {
  switch (kind) {
    case Kind::DomainLevel:
      return "domain:" + domain;
    case Kind::EntityLevel:
      return fmt::format("entity:{}/{}", domain, entity_id.value_or(""));
    case Kind::Global:
      break;
  }
  return "global";
}

namespace {

CandidateDocument make_candidate(const KnowledgeSnippet& s) {
  std::string raw;
  if (s.entity_name) {
    raw += *s.entity_name;
    raw += ' ';
  }
  raw += s.title;
  raw += ' ';
  raw += s.body;
  return CandidateDocument{s.key, text::tokenize(raw)};
}

}  // namespace

std::vector<CandidateDocument> build_candidates(const KnowledgeBase& kb,
                                                const CandidateScope& scope) {
  std::vector<CandidateDocument> out;
  auto add = [&](const std::vector<std::size_t>& ids) {
    for (std::size_t i : ids) out.push_back(make_candidate(kb.snippets()[i]));
  };
  switch (scope.kind) {
    case CandidateScope::Kind::DomainLevel:
      add(kb.domain_level(scope.domain));
      break;
    case CandidateScope::Kind::EntityLevel:
      if (!scope.entity_id) throw ValidationError("entity scope without entity_id");
      add(kb.entity_level(scope.domain, *scope.entity_id));
      break;
    case CandidateScope::Kind::Global:
      for (const auto& s : kb.snippets()) out.push_back(make_candidate(s));
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------

TermIndex TermIndex::build(std::span<const CandidateDocument> docs) {
  if (docs.empty()) throw ValidationError("cannot index an empty candidate list");
  TermIndex index;
  double total = 0.0;
  for (const auto& doc : docs) {
    std::map<std::size_t, double> counts;
    for (const auto& tok : doc.text) {
      auto [it, inserted] = index.vocabulary_.emplace(tok, index.terms_.size());
      if (inserted) {
        index.terms_.push_back(tok);
        index.df_.push_back(0);
      }
      counts[it->second] += 1.0;
    }
    std::vector<Posting> postings;
    postings.reserve(counts.size());
    for (const auto& [term, count] : counts) {
      ++index.df_[term];
      postings.push_back({term, count});
    }
    index.postings_.push_back(std::move(postings));
    index.keys_.push_back(doc.key);
    index.lengths_.push_back(static_cast<double>(doc.text.size()));
    total += static_cast<double>(doc.text.size());
  }
  index.avg_length_ = total / static_cast<double>(docs.size());
  return index;
}

std::optional<std::size_t> TermIndex::term_id(const std::string& term) const {
  auto it = vocabulary_.find(term);
  if (it == vocabulary_.end()) return std::nullopt;
  return it->second;
}

std::size_t TermIndex::df(const std::string& term) const {
  auto id = term_id(term);
  return id ? df_[*id] : 0;
}

Ranking Ranking::sorted(TurnKey turn, std::vector<ScoredCandidate> items) {
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.key < b.key;
  });
  return Ranking{std::move(turn), std::move(items)};
}

text::TokenSequence query_tokens(const DialogueContext& context) {
  text::TokenSequence query;
  for (const auto& t : context.turns) query.append(text::tokenize(t.text));
  return query;
}

namespace {

// In-vocabulary query term frequencies, keyed by term id.
std::map<std::size_t, double> query_counts(const TermIndex& index,
                                           const text::TokenSequence& query) {
  std::map<std::size_t, double> counts;
  for (const auto& tok : query) {
    if (auto id = index.term_id(tok)) counts[*id] += 1.0;
  }
  return counts;
}

double tf_at(const std::vector<TermIndex::Posting>& postings, std::size_t term) {
  auto it = std::lower_bound(
      postings.begin(), postings.end(), term,
      [](const TermIndex::Posting& p, std::size_t t) { return p.term < t; });
  return (it != postings.end() && it->term == term) ? it->count : 0.0;
}

}  // namespace

Ranking score_tfidf(const TermIndex& index, const text::TokenSequence& query,
                    TurnKey turn) {
  const double n = static_cast<double>(index.num_docs());
  std::vector<double> idf(index.vocabulary_size());
  for (std::size_t t = 0; t < idf.size(); ++t) {
    idf[t] = std::log((1.0 + n) / (1.0 + static_cast<double>(index.df(t)))) + 1.0;
  }

  const auto q = query_counts(index, query);
  double q_norm = 0.0;
  for (const auto& [t, c] : q) q_norm += (c * idf[t]) * (c * idf[t]);
  q_norm = std::sqrt(q_norm);

  std::vector<ScoredCandidate> items;
  items.reserve(index.num_docs());
  for (std::size_t d = 0; d < index.num_docs(); ++d) {
    const auto& postings = index.postings(d);
    double d_norm = 0.0;
    for (const auto& p : postings) d_norm += (p.count * idf[p.term]) * (p.count * idf[p.term]);
    d_norm = std::sqrt(d_norm);
    double dot = 0.0;
    for (const auto& [t, c] : q) dot += (c * idf[t]) * (tf_at(postings, t) * idf[t]);
    const double score = (q_norm > 0.0 && d_norm > 0.0) ? dot / (q_norm * d_norm) : 0.0;
    items.push_back({index.key(d), score});
  }
  return Ranking::sorted(std::move(turn), std::move(items));
}

Ranking score_tfidf(const TermIndex& index, const DialogueContext& context,
                    TurnKey turn) {
  if (context.turns.empty()) throw std::invalid_argument("empty dialogue context");
  return score_tfidf(index, query_tokens(context), std::move(turn));
}

Ranking score_bm25(const TermIndex& index, const text::TokenSequence& query,
                   const Bm25Params& params, TurnKey turn) {
  if (!(params.k1 > 0.0)) throw ValidationError("BM25: k1 must be > 0");
  if (!(params.b >= 0.0 && params.b <= 1.0)) {
    throw ValidationError("BM25: b must lie in [0, 1]");
  }
  const double n = static_cast<double>(index.num_docs());
  const auto q = query_counts(index, query);

  std::vector<ScoredCandidate> items;
  items.reserve(index.num_docs());
  for (std::size_t d = 0; d < index.num_docs(); ++d) {
    const auto& postings = index.postings(d);
    const double norm = params.k1 * (1.0 - params.b +
                                     params.b * index.length(d) / index.average_length());
    double score = 0.0;
    for (const auto& [t, qf] : q) {
      const double tf = tf_at(postings, t);
      if (tf == 0.0) continue;
      const double df = static_cast<double>(index.df(t));
      const double idf = std::log((n - df + 0.5) / (df + 0.5) + 1.0);
      score += qf * idf * tf * (params.k1 + 1.0) / (tf + norm);
    }
    items.push_back({index.key(d), score});
  }
  return Ranking::sorted(std::move(turn), std::move(items));
}

Ranking score_bm25(const TermIndex& index, const DialogueContext& context,
                   const Bm25Params& params, TurnKey turn) {
  if (context.turns.empty()) throw std::invalid_argument("empty dialogue context");
  return score_bm25(index, query_tokens(context), params, std::move(turn));
}

const KnowledgeKey& select_top1(const Ranking& ranking) {
  if (ranking.empty()) throw std::invalid_argument("select_top1: empty ranking");
  return ranking.items.front().key;
}

std::vector<KnowledgeKey> select_above(const Ranking& ranking, double threshold) {
  std::vector<KnowledgeKey> out;
  for (const auto& c : ranking.items) {
    if (c.score >= threshold) out.push_back(c.key);
  }
  if (out.empty()) out.push_back(select_top1(ranking));
  return out;
}

// ---------------------------------------------------------------------------

NegativeSample sample_negatives(const KnowledgeBase& kb,
                                const KnowledgeKey& positive, int m,
                                std::uint64_t seed) {
  if (m < 1) throw std::invalid_argument("sample_negatives: m must be >= 1");
  kb.at(positive);

  const auto& ids = positive.entity_id
                        ? kb.entity_level(positive.domain, *positive.entity_id)
                        : kb.domain_level(positive.domain);
  std::vector<KnowledgeKey> pool;
  for (std::size_t i : ids) {
    if (kb.snippets()[i].key != positive) pool.push_back(kb.snippets()[i].key);
  }
  std::sort(pool.begin(), pool.end());

  NegativeSample out;
  const std::size_t want = static_cast<std::size_t>(m);
  if (pool.size() <= want) {
    out.insufficient = pool.size() < want;
  }
  const std::size_t take = std::min(want, pool.size());
  // Partial Fisher-Yates: the first `take` slots become the sample.
  Rng rng(seed);
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.uniform_index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(take);
  out.negatives = std::move(pool);
  return out;
}

std::vector<Ranking> parse_external_selection_scores(
    const std::string& text, const std::string& source, const KnowledgeBase& kb,
    const std::map<TurnKey, CandidateScope>& scopes, bool unit_scores) {
  std::map<TurnKey, std::map<KnowledgeKey, double>> scores;
  detail::for_each_jsonl_text(text, source, [&](const Json& r, const std::string& where) {
    TurnKey turn{detail::require_id(r, "dialogue_id", where),
                 detail::require_int(r, "turn", where)};
    KnowledgeKey key = detail::key_from_json(r, where);
    const double score = detail::require_number(r, "score", where);
    if (!std::isfinite(score)) throw ParseError(where, "score is not finite");
    if (unit_scores && !(score >= 0.0 && score <= 1.0)) {
      throw ParseError(where, fmt::format("score {} outside [0, 1]", score));
    }
    if (!scopes.count(turn)) return;
    if (!scores[turn].emplace(key, score).second) {
      throw ParseError(where, fmt::format("duplicate score for {} at {}",
                                          key.to_string(), to_string(turn)));
    }
  });

  std::vector<Ranking> out;
  for (const auto& [turn, scope] : scopes) {
    const auto& turn_scores = scores[turn];
    std::vector<ScoredCandidate> items;
    for (const auto& doc : build_candidates(kb, scope)) {
      auto it = turn_scores.find(doc.key);
      if (it == turn_scores.end()) {
        throw DataError(fmt::format("{}: turn {} has no score for candidate {}",
                                    source, to_string(turn), doc.key.to_string()));
      }
      items.push_back({doc.key, it->second});
    }
    out.push_back(Ranking::sorted(turn, std::move(items)));
  }
  return out;
}

std::vector<Ranking> ingest_external_selection_scores(
    const std::filesystem::path& path, const KnowledgeBase& kb,
    const std::map<TurnKey, CandidateScope>& scopes, bool unit_scores) {
  return parse_external_selection_scores(read_file(path), path.string(), kb, scopes,
                                         unit_scores);
}

}  // namespace ukad::selection
