#include "ukad/detection.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "json_util.hpp"
#include "ukad/errors.hpp"

namespace ukad::detection {

using detail::Json;

DenseVector::DenseVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw ValidationError("vector must have dim > 0");
  for (double v : values_) {
    if (!std::isfinite(v)) throw ValidationError("vector has a non-finite value");
  }
}

double euclidean(const DenseVector& a, const DenseVector& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

namespace {

double floored(double mean_reach) {
  return mean_reach > 0.0 ? mean_reach : kDistanceFloor;
}

double kth_smallest(std::vector<double> values, int k) {
  auto nth = values.begin() + (k - 1);
  std::nth_element(values.begin(), nth, values.end());
  return *nth;
}

}  // namespace

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty set");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile outside [0,1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

LofModel LofModel::fit(std::vector<DenseVector> train, int k,
                       double threshold_quantile) {
  if (k < 1) throw ValidationError("LOF: k must be >= 1");
  if (train.size() < static_cast<std::size_t>(k) + 1) {
    throw ValidationError(fmt::format(
        "LOF: need at least k+1 = {} training vectors, got {}", k + 1,
        train.size()));
  }
  const std::size_t dim = train.front().dim();
  for (const auto& v : train) {
    if (v.dim() != dim) {
      throw ValidationError(fmt::format(
          "LOF: dimension mismatch ({} vs {})", v.dim(), dim));
    }
  }

  LofModel model;
  model.k_ = k;
  model.train_ = std::move(train);
  const std::size_t n = model.train_.size();
  model.k_distance_.resize(n);
  model.neighbors_.resize(n);
  std::vector<std::vector<double>> neighbor_dist(n);

  std::vector<double> row(n);
  std::vector<double> others;
  others.reserve(n - 1);
  for (std::size_t a = 0; a < n; ++a) {
    others.clear();
    for (std::size_t b = 0; b < n; ++b) {
      if (b == a) continue;
      row[b] = euclidean(model.train_[a], model.train_[b]);
      others.push_back(row[b]);
    }
    const double kdist = kth_smallest(others, k);
    model.k_distance_[a] = kdist;
    for (std::size_t b = 0; b < n; ++b) {
      if (b != a && row[b] <= kdist) {
        model.neighbors_[a].push_back(b);
        neighbor_dist[a].push_back(row[b]);
      }
    }
  }

  model.lrd_.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    double sum = 0.0;
    const auto& nb = model.neighbors_[a];
    for (std::size_t i = 0; i < nb.size(); ++i) {
      sum += std::max(model.k_distance_[nb[i]], neighbor_dist[a][i]);
    }
    model.lrd_[a] = 1.0 / floored(sum / static_cast<double>(nb.size()));
  }

  model.scores_.resize(n);
  for (std::size_t a = 0; a < n; ++a) {
    double sum = 0.0;
    for (std::size_t b : model.neighbors_[a]) sum += model.lrd_[b] / model.lrd_[a];
    model.scores_[a] = sum / static_cast<double>(model.neighbors_[a].size());
  }
  model.threshold_ = quantile(model.scores_, threshold_quantile);
  return model;
}

double LofModel::score(const DenseVector& query) const {
  if (query.dim() != dim()) {
    throw ValidationError(fmt::format("LOF: query dim {} != model dim {}",
                                      query.dim(), dim()));
  }
  const std::size_t n = train_.size();
  std::vector<double> dist(n);
  for (std::size_t b = 0; b < n; ++b) dist[b] = euclidean(query, train_[b]);
  const double kdist = kth_smallest(dist, k_);

  double reach_sum = 0.0;
  std::size_t count = 0;
  for (std::size_t b = 0; b < n; ++b) {
    if (dist[b] <= kdist) {
      reach_sum += std::max(k_distance_[b], dist[b]);
      ++count;
    }
  }
  const double lrd_q = 1.0 / floored(reach_sum / static_cast<double>(count));

  double ratio_sum = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    if (dist[b] <= kdist) ratio_sum += lrd_[b] / lrd_q;
  }
  return ratio_sum / static_cast<double>(count);
}

LofModel fit_lof(std::vector<DenseVector> train, int k, double threshold_quantile) {
  return LofModel::fit(std::move(train), k, threshold_quantile);
}

double lof_score(const LofModel& model, const DenseVector& query) {
  return model.score(query);
}

bool detect_turn(const LofModel& model, const DenseVector& utterance) {
  return model.score(utterance) > model.threshold();
}

// ---------------------------------------------------------------------------

VectorTable parse_vectors(const std::string& text, const std::string& source) {
  VectorTable table;
  std::optional<std::size_t> dim;
  detail::for_each_jsonl_text(text, source, [&](const Json& r, const std::string& where) {
    TurnKey key{detail::require_id(r, "dialogue_id", where),
                detail::require_int(r, "turn", where)};
    const Json& vec = detail::require(r, "vec", where);
    if (!vec.is_array()) throw ParseError(where, "'vec' must be a list");
    std::vector<double> values;
    values.reserve(vec.size());
    for (const auto& x : vec) {
      if (!x.is_number()) throw ParseError(where, "'vec' must hold numbers");
      values.push_back(x.get<double>());
    }
    if (dim && values.size() != *dim) {
      throw ParseError(where, fmt::format("ragged vector: dim {} but expected {}",
                                          values.size(), *dim));
    }
    dim = values.size();
    try {
      DenseVector v(std::move(values));
      if (!table.emplace(key, std::move(v)).second) {
        throw ParseError(where, fmt::format("duplicate key {}", to_string(key)));
      }
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ParseError(where, e.what());
    }
  });
  return table;
}

VectorTable load_vectors(const std::filesystem::path& path) {
  return parse_vectors(read_file(path), path.string());
}

std::vector<DetectionPrediction> parse_external_detection_scores(
    const std::string& text, const std::string& source,
    std::optional<std::span<const TurnKey>> required, double threshold) {
  std::vector<DetectionPrediction> out;
  std::set<TurnKey> seen;
  detail::for_each_jsonl_text(text, source, [&](const Json& r, const std::string& where) {
    DetectionPrediction p;
    p.turn = TurnKey{detail::require_id(r, "dialogue_id", where),
                     detail::require_int(r, "turn", where)};
    p.score = detail::require_number(r, "score", where);
    if (!(p.score >= 0.0 && p.score <= 1.0)) {
      throw ParseError(where, fmt::format("score {} outside [0, 1]", p.score));
    }
    if (!seen.insert(p.turn).second) {
      throw ParseError(where, fmt::format("duplicate turn {}", to_string(p.turn)));
    }
    p.predicted = p.score >= threshold;
    out.push_back(std::move(p));
  });
  if (required) {
    for (const auto& key : *required) {
      if (!seen.count(key)) {
        throw DataError(fmt::format("{}: missing score for turn {}", source,
                                    to_string(key)));
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.turn < b.turn; });
  return out;
}

std::vector<DetectionPrediction> ingest_external_detection_scores(
    const std::filesystem::path& path,
    std::optional<std::span<const TurnKey>> required, double threshold) {
  return parse_external_detection_scores(read_file(path), path.string(),
                                         required, threshold);
}

std::string predictions_to_jsonl(std::span<const DetectionPrediction> preds) {
  std::string out;
  for (const auto& p : preds) {
    Json j = Json::object();
    j["dialogue_id"] = p.turn.dialogue_id;
    j["turn"] = p.turn.turn;
    j["score"] = p.score;
    j["detected"] = p.predicted;
    out += detail::dump_line(j);
    out += '\n';
  }
  return out;
}

std::vector<DetectionPrediction> parse_predictions(const std::string& text,
                                                   const std::string& source) {
  std::vector<DetectionPrediction> out;
  std::set<TurnKey> seen;
  detail::for_each_jsonl_text(text, source, [&](const Json& r, const std::string& where) {
    DetectionPrediction p;
    p.turn = TurnKey{detail::require_id(r, "dialogue_id", where),
                     detail::require_int(r, "turn", where)};
    p.score = detail::require_number(r, "score", where);
    p.predicted = detail::require_bool(r, "detected", where);
    if (!seen.insert(p.turn).second) {
      throw ParseError(where, fmt::format("duplicate turn {}", to_string(p.turn)));
    }
    out.push_back(std::move(p));
  });
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.turn < b.turn; });
  return out;
}

std::vector<DetectionPrediction> load_predictions(const std::filesystem::path& path) {
  return parse_predictions(read_file(path), path.string());
}

// ---------------------------------------------------------------------------

TfidfEncoder TfidfEncoder::fit(std::span<const text::TokenSequence> docs,
                               std::size_t max_features) {
  std::map<std::string, std::size_t> df;
  std::map<std::string, std::size_t> first_seen;
  std::size_t order = 0;
  for (const auto& doc : docs) {
    std::set<std::string> uniq(doc.begin(), doc.end());
    for (const auto& t : doc) {
      if (first_seen.emplace(t, order).second) ++order;
    }
    for (const auto& t : uniq) ++df[t];
  }
  if (df.empty()) throw ValidationError("TF-IDF encoder: empty vocabulary");

  std::vector<std::string> terms;
  for (const auto& [t, c] : df) terms.push_back(t);
  std::stable_sort(terms.begin(), terms.end(), [&](const auto& a, const auto& b) {
    if (df[a] != df[b]) return df[a] > df[b];
    return first_seen[a] < first_seen[b];
  });
  if (terms.size() > max_features) terms.resize(max_features);

  TfidfEncoder enc;
  const double n = static_cast<double>(docs.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    enc.vocabulary_.emplace(terms[i], i);
    enc.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(df[terms[i]]))) +
                       1.0);
  }
  return enc;
}

DenseVector TfidfEncoder::encode(const text::TokenSequence& tokens) const {
  std::vector<double> v(idf_.size(), 0.0);
  for (const auto& t : tokens) {
    if (auto it = vocabulary_.find(t); it != vocabulary_.end()) v[it->second] += 1.0;
  }
  double norm = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] *= idf_[i];
    norm += v[i] * v[i];
  }
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return DenseVector(std::move(v));
}

}  // namespace ukad::detection
