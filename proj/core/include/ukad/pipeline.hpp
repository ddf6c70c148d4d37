#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ukad/corpus.hpp"
#include "ukad/detection.hpp"
#include "ukad/metrics.hpp"
#include "ukad/selection.hpp"

namespace ukad::pipeline {

// `Oracle` copies gold labels; it exists to check the harness itself.
enum class DetectionMethod { Lof, External, Oracle };
enum class SelectionMethod { Tfidf, Bm25, External, Oracle };
enum class GenerationMethod { Extract, External, Oracle };

std::string to_string(DetectionMethod m);
std::string to_string(SelectionMethod m);
std::string to_string(GenerationMethod m);
DetectionMethod parse_detection_method(const std::string& s);    // ConfigError
SelectionMethod parse_selection_method(const std::string& s);
GenerationMethod parse_generation_method(const std::string& s);

struct Paths {
  std::optional<std::filesystem::path> knowledge;
  std::optional<std::filesystem::path> logs;
  std::optional<std::filesystem::path> labels;
  // LOF inputs. Without `vectors`, utterances are encoded with TF-IDF.
  std::optional<std::filesystem::path> vectors;
  std::optional<std::filesystem::path> lof_train_vectors;
  std::optional<std::filesystem::path> train_logs;
  // External-mode inputs.
  std::optional<std::filesystem::path> detection_scores;
  std::optional<std::filesystem::path> selection_scores;
  std::optional<std::filesystem::path> responses;
};

struct PipelineConfig {
  int window = kDefaultWindow;
  int lof_k = detection::kDefaultNeighbors;
  double lof_quantile = detection::kDefaultThresholdQuantile;
  selection::Bm25Params bm25;
  DetectionMethod detection = DetectionMethod::Lof;
  SelectionMethod selection = SelectionMethod::Tfidf;
  GenerationMethod generation = GenerationMethod::Extract;
  // When set, every candidate at or above it is selected instead of top-1.
  std::optional<double> selection_threshold;
  std::uint64_t seed = 0;
  Paths paths;

  // Throws ConfigError on out-of-range parameters, on a method whose inputs
  // are not configured, or on a configured path that does not exist.
  void validate() const;
};

// JSON object with any of: window, seed, selection_threshold,
// lof {k, quantile}, bm25 {k1, b}, detection, selection, generation, and
// paths {knowledge, logs, labels, vectors, lof_train_vectors, train_logs,
// detection_scores, selection_scores, responses}. Relative paths resolve
// against the config file's directory. Unknown keys are rejected.
PipelineConfig parse_config(const std::string& json_text,
                            const std::string& source = "<config>",
                            const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

struct PredictionRecord {
  TurnKey turn;
  bool detected = false;
  std::optional<double> detection_score;
  std::vector<KnowledgeKey> selected;
  std::optional<std::string> response;
  // Full in-scope ranking; lets evaluation compute MRR@5 and R@5.
  std::optional<std::vector<selection::ScoredCandidate>> ranking;
  // "unscoped": no annotation to scope by, ranked against the whole base.
  // "low_score": best candidate scored 0, so the detection is suspect.
  std::optional<std::string> diagnostic;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

using PredictionFile = std::vector<PredictionRecord>;

// Throws ValidationError unless selected/response are present iff detected.
void check_gating(const PredictionRecord& record);

// JSON lines sorted by (dialogue_id, turn).
std::string predictions_to_jsonl(PredictionFile predictions);
PredictionFile parse_predictions(const std::string& text,
                                 const std::string& source = "<predictions>");
PredictionFile load_predictions(const std::filesystem::path& path);

struct Corpus {
  KnowledgeBase kb;
  std::vector<Dialogue> dialogues;
};

// Reads knowledge, logs and (if configured) labels.
Corpus load_corpus(const PipelineConfig& config);

// One record per user turn, sorted by (dialogue_id, turn).
PredictionFile run_end_to_end(const PipelineConfig& config, const Corpus& corpus);

// Individual stages, as used by run_end_to_end and the sub-commands.
std::vector<detection::DetectionPrediction> run_detection(const PipelineConfig& config,
                                                          const Corpus& corpus);

// Scope of a turn: its first gold reference, else Global.
selection::CandidateScope scope_for_turn(const Dialogue& dialogue, int t);

struct EvaluationSet {
  bool detection = true;
  bool selection = true;
  bool generation = true;
};

// Requires labels on every dialogue. Undetected gold turns count as
// selection misses and as empty responses.
metrics::Reports evaluate(const PredictionFile& predictions,
                          std::span<const Dialogue> dialogues,
                          const EvaluationSet& which = {});

// Gold sets derived from labels.
std::map<TurnKey, bool> detection_golds(std::span<const Dialogue> dialogues);
metrics::SelectionGolds selection_golds(std::span<const Dialogue> dialogues);
std::map<TurnKey, std::string> response_golds(std::span<const Dialogue> dialogues);

struct FixtureSizes {
  int domains = 2;
  int entities_per_domain = 3;
  int docs_per_entity = 4;
  int domain_docs = 2;
  int dialogues = 10;
  int seeking_per_dialogue = 2;
  int filler_turns = 3;  // user turns before each knowledge-seeking turn

  void validate() const;
};

struct FixtureFiles {
  std::string knowledge;
  std::string logs;
  std::string labels;
};

// Synthetic corpus in which each gold snippet is the only one in its scope
// sharing a rare keyword with its turn. Identical output for identical input.
FixtureFiles make_fixture(std::uint64_t seed, const FixtureSizes& sizes = {});
void write_fixture(const FixtureFiles& files, const std::filesystem::path& dir);

}  // namespace ukad::pipeline
