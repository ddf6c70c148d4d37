#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ukad/corpus.hpp"
#include "ukad/detection.hpp"
#include "ukad/selection.hpp"
#include "ukad/text.hpp"

namespace ukad::metrics {

// ---------------------------------------------------------------------------
// Knowledge-seeking turn detection

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct DetectionReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  ConfusionCounts counts;
  // Set when the corresponding denominator was zero and the value reported
  // as 0 by convention.
  bool precision_degenerate = false;
  bool recall_degenerate = false;
  std::size_t n_turns = 0;
};

DetectionReport detection_metrics(const ConfusionCounts& counts);

// Exactly one prediction per gold turn is required; predictions for turns
// without a gold label are ignored. Throws DataError on coverage mismatch.
DetectionReport detection_metrics(
    std::span<const detection::DetectionPrediction> predictions,
    const std::map<TurnKey, bool>& golds);

// ---------------------------------------------------------------------------
// Knowledge selection

using SelectionGolds = std::map<TurnKey, std::vector<KnowledgeKey>>;

enum class RankingCoverage {
  // Rankings list every in-scope candidate; a gold key missing from a
  // non-empty ranking is an error ("gold not in candidate scope").
  Full,
  // Rankings are truncated (e.g. only the selected keys); a missing gold key
  // simply counts as a miss.
  Partial,
};

struct SelectionReport {
  double mrr_at_5 = 0.0;
  double r_at_1 = 0.0;
  double r_at_5 = 0.0;
  std::size_t n_turns = 0;
};

// 1-based rank of the highest-ranked gold key, if present.
std::optional<std::size_t> gold_rank(const selection::Ranking& ranking,
                                     std::span<const KnowledgeKey> golds);

// Rankings and golds are paired by turn and must cover the same turns. An
// empty ranking (turn never reached selection) counts as a miss.
double mrr_at_k(std::span<const selection::Ranking> rankings,
                const SelectionGolds& golds, std::size_t k,
                RankingCoverage coverage = RankingCoverage::Full);
double recall_at_k(std::span<const selection::Ranking> rankings,
                   const SelectionGolds& golds, std::size_t k,
                   RankingCoverage coverage = RankingCoverage::Full);
SelectionReport selection_metrics(std::span<const selection::Ranking> rankings,
                                  const SelectionGolds& golds,
                                  RankingCoverage coverage = RankingCoverage::Full);

// ---------------------------------------------------------------------------
// Response generation. String overloads tokenize with text::tokenize.

double unigram_f1(const text::TokenSequence& hyp, const text::TokenSequence& ref);
double unigram_f1(std::string_view hyp, std::string_view ref);

// Distinct n-grams over total n-grams across all responses; 0 when empty.
double distinct_n(std::span<const text::TokenSequence> responses, std::size_t n);
double distinct_n(std::span<const std::string> responses, std::size_t n);

// Corpus BLEU-4, uniform weights, no smoothing.
double bleu4(std::span<const text::TokenSequence> hyps,
             std::span<const text::TokenSequence> refs);
double bleu4(std::span<const std::string> hyps, std::span<const std::string> refs);

// Sentence BLEU-4 with add-one smoothing on the 2..4-gram precisions. For
// per-instance diagnostics only; never reported alongside corpus BLEU.
double sentence_bleu_smoothed(const text::TokenSequence& hyp,
                              const text::TokenSequence& ref);

struct MeteorParams {
  double alpha = 0.9;
  double beta = 3.0;
  double gamma = 0.5;
};

struct MeteorAlignment {
  std::size_t matches = 0;        // exact + stem
  std::size_t exact_matches = 0;
  std::size_t chunks = 0;
  // (hyp index, ref index), sorted by hyp index.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
};

// Exact stage then Porter-stem stage on the leftovers. Among alignments of
// maximal size the one with the fewest chunks is returned.
MeteorAlignment meteor_align(const text::TokenSequence& hyp,
                             const text::TokenSequence& ref);
double meteor(const text::TokenSequence& hyp, const text::TokenSequence& ref,
              const MeteorParams& params = {});
double meteor(std::string_view hyp, std::string_view ref,
              const MeteorParams& params = {});

std::size_t lcs_length(const text::TokenSequence& a, const text::TokenSequence& b);
double rouge_l(const text::TokenSequence& hyp, const text::TokenSequence& ref);
double rouge_l(std::string_view hyp, std::string_view ref);

struct GenerationReport {
  double unigram_f1 = 0.0;
  double distinct_1 = 0.0;
  double distinct_2 = 0.0;
  double bleu4 = 0.0;
  double meteor = 0.0;
  double rouge_l = 0.0;
  std::size_t n_turns = 0;
};

// Sentence-level metrics are averaged over pairs; BLEU is corpus-level;
// distinct-n is computed over the hypotheses.
GenerationReport generation_metrics(std::span<const std::string> hyps,
                                    std::span<const std::string> refs);

// ---------------------------------------------------------------------------
// Human evaluation

enum class Vote { A, B, NotSure };
enum class HumanLabel { Win, Lose, Tie };

struct HumanEvalReport {
  double pct_win = 0.0;
  double pct_lose = 0.0;
  double pct_tie = 0.0;
  std::size_t n_instances = 0;
};

// Strict majority of the votes; NotSure majority or no majority is a tie.
HumanLabel majority_label(std::span<const Vote> votes);
HumanEvalReport human_eval_majority(std::span<const std::vector<Vote>> judgments);

struct VoteRecord {
  std::string instance_id;
  std::vector<Vote> votes;
};

// JSON lines {instance_id, votes: ["A"|"B"|"NS", ...]}.
std::vector<VoteRecord> load_votes(const std::filesystem::path& path);
std::vector<VoteRecord> parse_votes(const std::string& text,
                                    const std::string& source = "<votes>");

// ---------------------------------------------------------------------------

struct Reports {
  std::optional<DetectionReport> detection;
  std::optional<SelectionReport> selection;
  std::optional<GenerationReport> generation;
  std::optional<HumanEvalReport> human_eval;
};

std::string reports_to_json(const Reports& reports);

}  // namespace ukad::metrics
