#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ukad/corpus.hpp"
#include "ukad/text.hpp"

namespace ukad::detection {

inline constexpr int kDefaultNeighbors = 20;
// Threshold = this quantile of the training LOF scores (contamination 0.1).
inline constexpr double kDefaultThresholdQuantile = 0.9;
// Zero mean reachability distances are replaced by this before inversion.
inline constexpr double kDistanceFloor = 1e-10;
inline constexpr double kExternalThreshold = 0.5;

class DenseVector {
 public:
  // Throws ValidationError when empty or when any value is not finite.
  explicit DenseVector(std::vector<double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const DenseVector&, const DenseVector&) = default;

 private:
  std::vector<double> values_;
};

double euclidean(const DenseVector& a, const DenseVector& b);

// Fitted Local Outlier Factor model under Euclidean distance. The
// k-neighborhood of a point holds every other point within its k-distance,
// so ties can make it larger than k.
class LofModel {
 public:
  static LofModel fit(std::vector<DenseVector> train, int k,
                      double threshold_quantile = kDefaultThresholdQuantile);

  // LOF of a query against the training set; the query is not inserted.
  double score(const DenseVector& query) const;

  int k() const noexcept { return k_; }
  std::size_t dim() const noexcept { return train_.front().dim(); }
  std::size_t size() const noexcept { return train_.size(); }
  double threshold() const noexcept { return threshold_; }
  void set_threshold(double t) noexcept { threshold_ = t; }

  std::span<const DenseVector> training_vectors() const noexcept { return train_; }
  std::span<const double> k_distances() const noexcept { return k_distance_; }
  std::span<const double> local_reachability_densities() const noexcept {
    return lrd_;
  }
  std::span<const double> training_scores() const noexcept { return scores_; }
  const std::vector<std::size_t>& neighborhood(std::size_t i) const {
    return neighbors_.at(i);
  }

 private:
  LofModel() = default;

  std::vector<DenseVector> train_;
  int k_ = 0;
  std::vector<double> k_distance_;
  std::vector<std::vector<std::size_t>> neighbors_;
  std::vector<double> lrd_;
  std::vector<double> scores_;
  double threshold_ = 0.0;
};

// Linear-interpolated quantile of `values`, q in [0, 1].
double quantile(std::vector<double> values, double q);

LofModel fit_lof(std::vector<DenseVector> train, int k = kDefaultNeighbors,
                 double threshold_quantile = kDefaultThresholdQuantile);
double lof_score(const LofModel& model, const DenseVector& query);
bool detect_turn(const LofModel& model, const DenseVector& utterance);

struct DetectionPrediction {
  TurnKey turn;
  double score = 0.0;
  bool predicted = false;

  friend bool operator==(const DetectionPrediction&,
                         const DetectionPrediction&) = default;
};

using VectorTable = std::map<TurnKey, DenseVector>;

// JSON lines: {dialogue_id, turn, vec: [...]}. Dimensions must agree.
VectorTable load_vectors(const std::filesystem::path& path);
VectorTable parse_vectors(const std::string& text,
                          const std::string& source = "<vectors>");

// JSON lines: {dialogue_id, turn, score}. Scores must lie in [0, 1];
// predicted = score >= threshold. When `required` is given every listed
// turn must be present.
std::vector<DetectionPrediction> ingest_external_detection_scores(
    const std::filesystem::path& path,
    std::optional<std::span<const TurnKey>> required = std::nullopt,
    double threshold = kExternalThreshold);
std::vector<DetectionPrediction> parse_external_detection_scores(
    const std::string& text, const std::string& source,
    std::optional<std::span<const TurnKey>> required = std::nullopt,
    double threshold = kExternalThreshold);

// JSON lines: {dialogue_id, turn, score, detected}.
std::string predictions_to_jsonl(std::span<const DetectionPrediction> preds);
// Inverse of predictions_to_jsonl. Scores are not range-checked.
std::vector<DetectionPrediction> parse_predictions(const std::string& text,
                                                   const std::string& source);
std::vector<DetectionPrediction> load_predictions(const std::filesystem::path& path);

// Dense TF-IDF utterance encoder for running LOF without external
// embeddings. Vocabulary is the `max_features` most frequent terms by
// document frequency (ties by first occurrence); vectors are L2-normalized.
class TfidfEncoder {
 public:
  static TfidfEncoder fit(std::span<const text::TokenSequence> docs,
                          std::size_t max_features = 1024);
  DenseVector encode(const text::TokenSequence& tokens) const;
  std::size_t dim() const noexcept { return idf_.size(); }

 private:
  std::map<std::string, std::size_t> vocabulary_;
  std::vector<double> idf_;
};

}  // namespace ukad::detection
