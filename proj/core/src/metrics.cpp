#include "ukad/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "json_util.hpp"
#include "ukad/errors.hpp"

namespace ukad::metrics {

using detail::Json;

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double harmonic(double p, double r) {
  return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Detection

DetectionReport detection_metrics(const ConfusionCounts& c) {
  DetectionReport r;
  r.counts = c;
  r.n_turns = c.total();
  const auto tp = static_cast<double>(c.tp);
  r.accuracy = ratio(static_cast<double>(c.tp + c.tn), static_cast<double>(c.total()));
  r.precision_degenerate = (c.tp + c.fp) == 0;
  r.recall_degenerate = (c.tp + c.fn) == 0;
  r.precision = ratio(tp, static_cast<double>(c.tp + c.fp));
  r.recall = ratio(tp, static_cast<double>(c.tp + c.fn));
  r.f1 = harmonic(r.precision, r.recall);
  return r;
}

DetectionReport detection_metrics(
    std::span<const detection::DetectionPrediction> predictions,
    const std::map<TurnKey, bool>& golds) {
  std::map<TurnKey, bool> predicted;
  for (const auto& p : predictions) {
    if (!golds.count(p.turn)) continue;
    if (!predicted.emplace(p.turn, p.predicted).second) {
      throw DataError(fmt::format("duplicate prediction for turn {}", to_string(p.turn)));
    }
  }
  ConfusionCounts c;
  for (const auto& [turn, gold] : golds) {
    auto it = predicted.find(turn);
    if (it == predicted.end()) {
      throw DataError(fmt::format("coverage mismatch: no prediction for turn {}",
                                  to_string(turn)));
    }
    if (it->second && gold) ++c.tp;
    else if (it->second && !gold) ++c.fp;
    else if (!it->second && gold) ++c.fn;
    else ++c.tn;
  }
  return detection_metrics(c);
}

// ---------------------------------------------------------------------------
// Selection

std::optional<std::size_t> gold_rank(const selection::Ranking& ranking,
                                     std::span<const KnowledgeKey> golds) {
  for (std::size_t i = 0; i < ranking.items.size(); ++i) {
    if (std::find(golds.begin(), golds.end(), ranking.items[i].key) != golds.end()) {
      return i + 1;
    }
  }
  return std::nullopt;
}

namespace {

// Gold rank per gold turn in TurnKey order; nullopt means a miss.
std::vector<std::optional<std::size_t>> paired_ranks(
    std::span<const selection::Ranking> rankings, const SelectionGolds& golds,
    RankingCoverage coverage) {
  std::map<TurnKey, const selection::Ranking*> by_turn;
  for (const auto& r : rankings) {
    if (!golds.count(r.turn)) {
      throw DataError(fmt::format("coverage mismatch: ranking for unlabeled turn {}",
                                  to_string(r.turn)));
    }
    if (!by_turn.emplace(r.turn, &r).second) {
      throw DataError(fmt::format("duplicate ranking for turn {}", to_string(r.turn)));
    }
  }
  std::vector<std::optional<std::size_t>> ranks;
  ranks.reserve(golds.size());
  for (const auto& [turn, gold_keys] : golds) {
    auto it = by_turn.find(turn);
    if (it == by_turn.end()) {
      throw DataError(
          fmt::format("coverage mismatch: no ranking for turn {}", to_string(turn)));
    }
    const auto rank = gold_rank(*it->second, gold_keys);
    if (!rank && coverage == RankingCoverage::Full && !it->second->empty()) {
      throw DataError(fmt::format("gold knowledge for turn {} is not in its candidate scope",
                                  to_string(turn)));
    }
    ranks.push_back(rank);
  }
  return ranks;
}

}  // namespace

double mrr_at_k(std::span<const selection::Ranking> rankings, const SelectionGolds& golds,
                std::size_t k, RankingCoverage coverage) {
  if (k == 0) throw std::invalid_argument("mrr_at_k: k must be >= 1");
  const auto ranks = paired_ranks(rankings, golds, coverage);
  if (ranks.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : ranks) {
    if (r && *r <= k) sum += 1.0 / static_cast<double>(*r);
  }
  return sum / static_cast<double>(ranks.size());
}

double recall_at_k(std::span<const selection::Ranking> rankings,
                   const SelectionGolds& golds, std::size_t k, RankingCoverage coverage) {
  if (k == 0) throw std::invalid_argument("recall_at_k: k must be >= 1");
  const auto ranks = paired_ranks(rankings, golds, coverage);
  if (ranks.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& r : ranks) {
    if (r && *r <= k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

SelectionReport selection_metrics(std::span<const selection::Ranking> rankings,
                                  const SelectionGolds& golds,
                                  RankingCoverage coverage) {
  SelectionReport r;
  r.mrr_at_5 = mrr_at_k(rankings, golds, 5, coverage);
  r.r_at_1 = recall_at_k(rankings, golds, 1, coverage);
  r.r_at_5 = recall_at_k(rankings, golds, 5, coverage);
  r.n_turns = golds.size();
  return r;
}

// ---------------------------------------------------------------------------
// Generation

namespace {

std::unordered_map<std::string, std::size_t> unigram_counts(const text::TokenSequence& s) {
  std::unordered_map<std::string, std::size_t> c;
  for (const auto& t : s) ++c[t];
  return c;
}

std::unordered_map<text::NGram, std::size_t> ngram_counts(const text::TokenSequence& s,
                                                          std::size_t n) {
  std::unordered_map<text::NGram, std::size_t> c;
  for (auto& g : text::ngrams(s, n)) ++c[std::move(g)];
  return c;
}

std::vector<text::TokenSequence> tokenize_all(std::span<const std::string> xs) {
  std::vector<text::TokenSequence> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(text::tokenize(x));
  return out;
}

// F1 with the empty-input convention shared by unigram F1 and ROUGE-L.
double overlap_f1(std::size_t overlap, std::size_t hyp_len, std::size_t ref_len) {
  if (hyp_len == 0 && ref_len == 0) return 1.0;
  if (hyp_len == 0 || ref_len == 0 || overlap == 0) return 0.0;
  const double p = static_cast<double>(overlap) / static_cast<double>(hyp_len);
  const double r = static_cast<double>(overlap) / static_cast<double>(ref_len);
  return harmonic(p, r);
}

}  // namespace

double unigram_f1(const text::TokenSequence& hyp, const text::TokenSequence& ref) {
  const auto ch = unigram_counts(hyp);
  const auto cr = unigram_counts(ref);
  std::size_t overlap = 0;
  for (const auto& [w, n] : ch) {
    if (auto it = cr.find(w); it != cr.end()) overlap += std::min(n, it->second);
  }
  return overlap_f1(overlap, hyp.size(), ref.size());
}

double unigram_f1(std::string_view hyp, std::string_view ref) {
  return unigram_f1(text::tokenize(hyp), text::tokenize(ref));
}

double distinct_n(std::span<const text::TokenSequence> responses, std::size_t n) {
  if (n == 0) throw std::invalid_argument("distinct_n: n must be >= 1");
  std::unordered_set<text::NGram> distinct;
  std::size_t total = 0;
  for (const auto& r : responses) {
    for (auto& g : text::ngrams(r, n)) {
      ++total;
      distinct.insert(std::move(g));
    }
  }
  return total ? static_cast<double>(distinct.size()) / static_cast<double>(total) : 0.0;
}

double distinct_n(std::span<const std::string> responses, std::size_t n) {
  const auto toks = tokenize_all(responses);
  return distinct_n(std::span<const text::TokenSequence>(toks), n);
}

double bleu4(std::span<const text::TokenSequence> hyps,
             std::span<const text::TokenSequence> refs) {
  if (hyps.size() != refs.size()) {
    throw std::invalid_argument(fmt::format(
        "bleu4: {} hypotheses but {} references", hyps.size(), refs.size()));
  }
  if (hyps.empty()) throw std::invalid_argument("bleu4: empty corpus");

  std::array<double, 4> matches{};
  std::array<double, 4> totals{};
  double hyp_len = 0.0;
  double ref_len = 0.0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    hyp_len += static_cast<double>(hyps[i].size());
    ref_len += static_cast<double>(refs[i].size());
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto ch = ngram_counts(hyps[i], n);
      const auto cr = ngram_counts(refs[i], n);
      for (const auto& [g, c] : ch) {
        totals[n - 1] += static_cast<double>(c);
        if (auto it = cr.find(g); it != cr.end()) {
          matches[n - 1] += static_cast<double>(std::min(c, it->second));
        }
      }
    }
  }
  double log_sum = 0.0;
  for (std::size_t n = 0; n < 4; ++n) {
    if (totals[n] == 0.0 || matches[n] == 0.0) return 0.0;
    log_sum += std::log(matches[n] / totals[n]);
  }
  const double bp = hyp_len < ref_len ? std::exp(1.0 - ref_len / hyp_len) : 1.0;
  return bp * std::exp(log_sum / 4.0);
}

double bleu4(std::span<const std::string> hyps, std::span<const std::string> refs) {
  const auto h = tokenize_all(hyps);
  const auto r = tokenize_all(refs);
  return bleu4(std::span<const text::TokenSequence>(h),
               std::span<const text::TokenSequence>(r));
}

double sentence_bleu_smoothed(const text::TokenSequence& hyp,
                              const text::TokenSequence& ref) {
  if (hyp.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto ch = ngram_counts(hyp, n);
    const auto cr = ngram_counts(ref, n);
    double m = 0.0;
    double t = 0.0;
    for (const auto& [g, c] : ch) {
      t += static_cast<double>(c);
      if (auto it = cr.find(g); it != cr.end()) {
        m += static_cast<double>(std::min(c, it->second));
      }
    }
    if (n > 1) {
      m += 1.0;
      t += 1.0;
    }
    if (m == 0.0) return 0.0;
    log_sum += std::log(m / t);
  }
  const double h = static_cast<double>(hyp.size());
  const double r = static_cast<double>(ref.size());
  const double bp = h < r ? std::exp(1.0 - r / h) : 1.0;
  return bp * std::exp(log_sum / 4.0);
}

// ---------------------------------------------------------------------------
// METEOR alignment

namespace {

constexpr int kInfeasible = std::numeric_limits<int>::min() / 2;
constexpr std::size_t kMaxAlignmentStates = std::size_t{1} << 20;

class MeteorAligner {
 public:
  MeteorAligner(const text::TokenSequence& hyp, const text::TokenSequence& ref)
      : hyp_(hyp), ref_(ref), used_(ref.size(), 0) {
    for (const auto& t : hyp) hyp_stem_.push_back(text::stem(t));
    for (const auto& t : ref) ref_stem_.push_back(text::stem(t));
    count_targets();
  }

  MeteorAlignment run() {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (exact_target_ + stem_target_ > 0) {
      if (search(0, -1, 0, 0) == kInfeasible) pairs = ordered_alignment();
      else pairs = reconstruct();
    }
    MeteorAlignment out;
    out.pairs = std::move(pairs);
    out.matches = out.pairs.size();
    out.exact_matches = exact_target_;
    for (std::size_t i = 0; i < out.pairs.size(); ++i) {
      const bool continues = i > 0 && out.pairs[i].first == out.pairs[i - 1].first + 1 &&
                             out.pairs[i].second == out.pairs[i - 1].second + 1;
      if (!continues) ++out.chunks;
    }
    return out;
  }

 private:
  // Maximal match counts are fixed by the multisets: every word pairs
  // min(count_hyp, count_ref) occurrences exactly, and the leftovers pair by
  // stem the same way.
  void count_targets() {
    std::map<std::string, std::pair<std::size_t, std::size_t>> words;
    for (const auto& t : hyp_) ++words[t].first;
    for (const auto& t : ref_) ++words[t].second;
    std::map<std::string, std::pair<std::size_t, std::size_t>> stems;
    for (const auto& [w, c] : words) {
      const std::size_t m = std::min(c.first, c.second);
      exact_target_ += m;
      const std::string s = text::stem(w);
      stems[s].first += c.first - m;
      stems[s].second += c.second - m;
    }
    for (const auto& [s, c] : stems) stem_target_ += std::min(c.first, c.second);
  }

  bool exact_pair(std::size_t i, std::size_t j) const { return hyp_[i] == ref_[j]; }
  bool stem_pair(std::size_t i, std::size_t j) const {
    return hyp_[i] != ref_[j] && hyp_stem_[i] == ref_stem_[j];
  }

  std::string state_key(std::size_t i, long prev, std::size_t e, std::size_t s) const {
    std::string key;
    key.reserve(24 + used_.size());
    key.append(reinterpret_cast<const char*>(&i), sizeof i);
    key.append(reinterpret_cast<const char*>(&prev), sizeof prev);
    key.append(reinterpret_cast<const char*>(&e), sizeof e);
    key.append(reinterpret_cast<const char*>(&s), sizeof s);
    key.append(used_.begin(), used_.end());
    return key;
  }

  // Best number of chunk continuations obtainable from hyp position i.
  int search(std::size_t i, long prev, std::size_t e, std::size_t s) {
    if (overflow_) return kInfeasible;
    const std::size_t need = (exact_target_ - e) + (stem_target_ - s);
    if (need > hyp_.size() - i) return kInfeasible;
    if (i == hyp_.size()) return 0;

    std::string key = state_key(i, prev, e, s);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (memo_.size() >= kMaxAlignmentStates) {
      overflow_ = true;
      return kInfeasible;
    }

    int best = search(i + 1, -1, e, s);
    for (std::size_t j = 0; j < ref_.size(); ++j) {
      if (used_[j]) continue;
      const bool exact = e < exact_target_ && exact_pair(i, j);
      const bool stemmed = !exact && s < stem_target_ && stem_pair(i, j);
      if (!exact && !stemmed) continue;
      used_[j] = 1;
      const int sub = search(i + 1, static_cast<long>(j), e + (exact ? 1 : 0),
                             s + (stemmed ? 1 : 0));
      used_[j] = 0;
      if (sub == kInfeasible) continue;
      const int gain = (prev >= 0 && static_cast<long>(j) == prev + 1) ? 1 : 0;
      best = std::max(best, sub + gain);
    }
    memo_.emplace(std::move(key), best);
    return best;
  }

  // Replays the memoized optimum, preferring earlier choices on ties.
  std::vector<std::pair<std::size_t, std::size_t>> reconstruct() {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    long prev = -1;
    std::size_t e = 0, s = 0;
    int remaining = search(0, -1, 0, 0);
    for (std::size_t i = 0; i < hyp_.size(); ++i) {
      if (search(i + 1, -1, e, s) == remaining) {
        prev = -1;
        continue;
      }
      bool found = false;
      for (std::size_t j = 0; j < ref_.size() && !found; ++j) {
        if (used_[j]) continue;
        const bool exact = e < exact_target_ && exact_pair(i, j);
        const bool stemmed = !exact && s < stem_target_ && stem_pair(i, j);
        if (!exact && !stemmed) continue;
        used_[j] = 1;
        const std::size_t e2 = e + (exact ? 1 : 0), s2 = s + (stemmed ? 1 : 0);
        const int sub = search(i + 1, static_cast<long>(j), e2, s2);
        const int gain = (prev >= 0 && static_cast<long>(j) == prev + 1) ? 1 : 0;
        if (sub != kInfeasible && sub + gain == remaining) {
          pairs.emplace_back(i, j);
          remaining = sub;
          prev = static_cast<long>(j);
          e = e2;
          s = s2;
          found = true;
        } else {
          used_[j] = 0;
        }
      }
    }
    std::fill(used_.begin(), used_.end(), 0);
    return pairs;
  }

  // Fallback when the state space is too large: the k-th unmatched
  // occurrence of a word (then of a stem) pairs with its k-th counterpart.
  // Maximal, but not guaranteed to minimize chunks.
  std::vector<std::pair<std::size_t, std::size_t>> ordered_alignment() {
    std::vector<char> hyp_used(hyp_.size(), 0), ref_used(ref_.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    auto stage = [&](auto same) {
      for (std::size_t i = 0; i < hyp_.size(); ++i) {
        if (hyp_used[i]) continue;
        for (std::size_t j = 0; j < ref_.size(); ++j) {
          if (!ref_used[j] && same(i, j)) {
            hyp_used[i] = ref_used[j] = 1;
            pairs.emplace_back(i, j);
            break;
          }
        }
      }
    };
    stage([&](std::size_t i, std::size_t j) { return exact_pair(i, j); });
    stage([&](std::size_t i, std::size_t j) { return hyp_stem_[i] == ref_stem_[j]; });
    std::sort(pairs.begin(), pairs.end());
    return pairs;
  }

  const text::TokenSequence& hyp_;
  const text::TokenSequence& ref_;
  std::vector<std::string> hyp_stem_;
  std::vector<std::string> ref_stem_;
  std::size_t exact_target_ = 0;
  std::size_t stem_target_ = 0;
  std::string used_;
  std::unordered_map<std::string, int> memo_;
  bool overflow_ = false;
};

}  // namespace

MeteorAlignment meteor_align(const text::TokenSequence& hyp,
                             const text::TokenSequence& ref) {
  return MeteorAligner(hyp, ref).run();
}

double meteor(const text::TokenSequence& hyp, const text::TokenSequence& ref,
              const MeteorParams& params) {
  const MeteorAlignment a = meteor_align(hyp, ref);
  if (a.matches == 0) return 0.0;
  const double m = static_cast<double>(a.matches);
  const double p = m / static_cast<double>(hyp.size());
  const double r = m / static_cast<double>(ref.size());
  const double f_mean = p * r / (params.alpha * p + (1.0 - params.alpha) * r);
  const double penalty =
      params.gamma * std::pow(static_cast<double>(a.chunks) / m, params.beta);
  return f_mean * (1.0 - penalty);
}

double meteor(std::string_view hyp, std::string_view ref, const MeteorParams& params) {
  return meteor(text::tokenize(hyp), text::tokenize(ref), params);
}

std::size_t lcs_length(const text::TokenSequence& a, const text::TokenSequence& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const text::TokenSequence& hyp, const text::TokenSequence& ref) {
  return overlap_f1(lcs_length(hyp, ref), hyp.size(), ref.size());
}

double rouge_l(std::string_view hyp, std::string_view ref) {
  return rouge_l(text::tokenize(hyp), text::tokenize(ref));
}

GenerationReport generation_metrics(std::span<const std::string> hyps,
                                    std::span<const std::string> refs) {
  if (hyps.size() != refs.size()) {
    throw std::invalid_argument("generation_metrics: length mismatch");
  }
  GenerationReport r;
  r.n_turns = hyps.size();
  if (hyps.empty()) return r;
  const auto h = tokenize_all(hyps);
  const auto g = tokenize_all(refs);
  double f1 = 0.0, met = 0.0, rl = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    f1 += unigram_f1(h[i], g[i]);
    met += meteor(h[i], g[i]);
    rl += rouge_l(h[i], g[i]);
  }
  const double n = static_cast<double>(h.size());
  r.unigram_f1 = f1 / n;
  r.meteor = met / n;
  r.rouge_l = rl / n;
  r.distinct_1 = distinct_n(std::span<const text::TokenSequence>(h), 1);
  r.distinct_2 = distinct_n(std::span<const text::TokenSequence>(h), 2);
  r.bleu4 = bleu4(std::span<const text::TokenSequence>(h),
                  std::span<const text::TokenSequence>(g));
  return r;
}

// ---------------------------------------------------------------------------
// Human evaluation

HumanLabel majority_label(std::span<const Vote> votes) {
  if (votes.empty()) throw std::invalid_argument("majority_label: no votes");
  std::size_t a = 0, b = 0;
  for (Vote v : votes) {
    if (v == Vote::A) ++a;
    else if (v == Vote::B) ++b;
  }
  if (2 * a > votes.size()) return HumanLabel::Win;
  if (2 * b > votes.size()) return HumanLabel::Lose;
  return HumanLabel::Tie;
}

HumanEvalReport human_eval_majority(std::span<const std::vector<Vote>> judgments) {
  HumanEvalReport r;
  r.n_instances = judgments.size();
  if (judgments.empty()) return r;
  std::size_t win = 0, lose = 0, tie = 0;
  for (const auto& votes : judgments) {
    switch (majority_label(votes)) {
      case HumanLabel::Win: ++win; break;
      case HumanLabel::Lose: ++lose; break;
      case HumanLabel::Tie: ++tie; break;
    }
  }
  const double n = static_cast<double>(judgments.size());
  r.pct_win = 100.0 * static_cast<double>(win) / n;
  r.pct_lose = 100.0 * static_cast<double>(lose) / n;
  r.pct_tie = 100.0 * static_cast<double>(tie) / n;
  return r;
}

std::vector<VoteRecord> parse_votes(const std::string& text, const std::string& source) {
  std::vector<VoteRecord> out;
  std::set<std::string> seen;
  detail::for_each_jsonl_text(text, source, [&](const Json& r, const std::string& where) {
    VoteRecord rec;
    rec.instance_id = detail::require_id(r, "instance_id", where);
    if (!seen.insert(rec.instance_id).second) {
      throw ParseError(where, fmt::format("duplicate instance '{}'", rec.instance_id));
    }
    const Json& votes = detail::require(r, "votes", where);
    if (!votes.is_array()) throw ParseError(where, "'votes' must be a list");
    for (const auto& v : votes) {
      const std::string s = v.is_string() ? v.get<std::string>() : std::string();
      if (s == "A") rec.votes.push_back(Vote::A);
      else if (s == "B") rec.votes.push_back(Vote::B);
      else if (s == "NS") rec.votes.push_back(Vote::NotSure);
      else throw ParseError(where, "votes must be \"A\", \"B\" or \"NS\"");
    }
    if (rec.votes.empty()) throw ParseError(where, "instance has no votes");
    out.push_back(std::move(rec));
  });
  return out;
}

std::vector<VoteRecord> load_votes(const std::filesystem::path& path) {
  return parse_votes(read_file(path), path.string());
}

// ---------------------------------------------------------------------------

std::string reports_to_json(const Reports& reports) {
  Json root = Json::object();
  if (const auto& d = reports.detection) {
    root["detection"] = {
        {"accuracy", d->accuracy},   {"precision", d->precision},
        {"recall", d->recall},       {"f1", d->f1},
        {"tp", d->counts.tp},        {"fp", d->counts.fp},
        {"fn", d->counts.fn},        {"tn", d->counts.tn},
        {"precision_degenerate", d->precision_degenerate},
        {"recall_degenerate", d->recall_degenerate},
        {"n_turns", d->n_turns}};
  }
  if (const auto& s = reports.selection) {
    root["selection"] = {{"mrr_at_5", s->mrr_at_5},
                         {"r_at_1", s->r_at_1},
                         {"r_at_5", s->r_at_5},
                         {"n_turns", s->n_turns}};
  }
  if (const auto& g = reports.generation) {
    root["generation"] = {{"unigram_f1", g->unigram_f1}, {"distinct_1", g->distinct_1},
                          {"distinct_2", g->distinct_2}, {"bleu4", g->bleu4},
                          {"meteor", g->meteor},         {"rouge_l", g->rouge_l},
                          {"n_turns", g->n_turns}};
  }
  if (const auto& h = reports.human_eval) {
    root["human_eval"] = {{"pct_win", h->pct_win},
                          {"pct_lose", h->pct_lose},
                          {"pct_tie", h->pct_tie},
                          {"n_instances", h->n_instances}};
  }
  return root.dump(2) + "\n";
}

}  // namespace ukad::metrics
