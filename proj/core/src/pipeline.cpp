#include "ukad/pipeline.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <array>
#include <set>

#include "json_util.hpp"
#include "ukad/errors.hpp"
#include "ukad/generation.hpp"
#include "ukad/random.hpp"

namespace ukad::pipeline {

using detail::Json;

// ---------------------------------------------------------------------------
// Methods

namespace {

template <typename E, std::size_t N>
E parse_enum(const std::string& s, const std::array<std::pair<const char*, E>, N>& table,
             const char* what) {
  for (const auto& [name, value] : table) {
    if (s == name) return value;
  }
  std::string allowed;
  for (const auto& [name, value] : table) {
    if (!allowed.empty()) allowed += ", ";
    allowed += name;
  }
  throw ConfigError(fmt::format("unknown {} method '{}' (expected one of: {})", what, s,
                                allowed));
}

constexpr std::array<std::pair<const char*, DetectionMethod>, 3> kDetectionNames{{
    {"lof", DetectionMethod::Lof},
    {"external", DetectionMethod::External},
    {"oracle", DetectionMethod::Oracle},
}};
constexpr std::array<std::pair<const char*, SelectionMethod>, 4> kSelectionNames{{
    {"tfidf", SelectionMethod::Tfidf},
    {"bm25", SelectionMethod::Bm25},
    {"external", SelectionMethod::External},
    {"oracle", SelectionMethod::Oracle},
}};
constexpr std::array<std::pair<const char*, GenerationMethod>, 3> kGenerationNames{{
    {"extract", GenerationMethod::Extract},
    {"external", GenerationMethod::External},
    {"oracle", GenerationMethod::Oracle},
}};

template <typename E, std::size_t N>
std::string enum_name(E m, const std::array<std::pair<const char*, E>, N>& table) {
  for (const auto& [name, value] : table) {
    if (value == m) return name;
  }
  return "?";
}

}  // namespace

std::string to_string(DetectionMethod m) { return enum_name(m, kDetectionNames); }
std::string to_string(SelectionMethod m) { return enum_name(m, kSelectionNames); }
std::string to_string(GenerationMethod m) { return enum_name(m, kGenerationNames); }

DetectionMethod parse_detection_method(const std::string& s) {
  return parse_enum(s, kDetectionNames, "detection");
}
SelectionMethod parse_selection_method(const std::string& s) {
  return parse_enum(s, kSelectionNames, "selection");
}
GenerationMethod parse_generation_method(const std::string& s) {
  return parse_enum(s, kGenerationNames, "generation");
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

void require_path(const std::optional<std::filesystem::path>& p, const char* name,
                  const std::string& reason) {
  if (!p) throw ConfigError(fmt::format("{} requires paths.{}", reason, name));
}

}  // namespace

void PipelineConfig::validate() const {
  if (window < 1) throw ConfigError(fmt::format("window must be >= 1, got {}", window));
  if (lof_k < 1) throw ConfigError(fmt::format("lof.k must be >= 1, got {}", lof_k));
  if (!(lof_quantile >= 0.0 && lof_quantile <= 1.0)) {
    throw ConfigError(fmt::format("lof.quantile must lie in [0, 1], got {}", lof_quantile));
  }
  if (!(bm25.k1 >= 0.0)) throw ConfigError("bm25.k1 must be >= 0");
  if (!(bm25.b >= 0.0 && bm25.b <= 1.0)) throw ConfigError("bm25.b must lie in [0, 1]");

  require_path(paths.knowledge, "knowledge", "every run");
  require_path(paths.logs, "logs", "every run");
  if (detection == DetectionMethod::External) {
    require_path(paths.detection_scores, "detection_scores", "external detection");
  }
  if (selection == SelectionMethod::External) {
    require_path(paths.selection_scores, "selection_scores", "external selection");
  }
  if (generation == GenerationMethod::External) {
    require_path(paths.responses, "responses", "external generation");
  }
  if (detection == DetectionMethod::Oracle) {
    require_path(paths.labels, "labels", "oracle detection");
  }
  if (selection == SelectionMethod::Oracle) {
    require_path(paths.labels, "labels", "oracle selection");
  }
  if (generation == GenerationMethod::Oracle) {
    require_path(paths.labels, "labels", "oracle generation");
  }
  if (paths.lof_train_vectors && !paths.vectors) {
    throw ConfigError("paths.lof_train_vectors requires paths.vectors");
  }

  const std::array<std::pair<const char*, const std::optional<std::filesystem::path>*>, 9>
      all{{{"knowledge", &paths.knowledge},
           {"logs", &paths.logs},
           {"labels", &paths.labels},
           {"vectors", &paths.vectors},
           {"lof_train_vectors", &paths.lof_train_vectors},
           {"train_logs", &paths.train_logs},
           {"detection_scores", &paths.detection_scores},
           {"selection_scores", &paths.selection_scores},
           {"responses", &paths.responses}}};
  for (const auto& [name, p] : all) {
    if (*p && !std::filesystem::exists(**p)) {
      throw ConfigError(fmt::format("paths.{}: '{}' does not exist", name, (*p)->string()));
    }
  }
}

namespace {

void reject_unknown(const Json& obj, std::initializer_list<const char*> known,
                    const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(known.begin(), known.end(),
                     [&](const char* k) { return key == k; }) == known.end()) {
      throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
    }
  }
}

double config_number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError(where + ": expected a number");
  return v.get<double>();
}

int config_int(const Json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
  return v.get<int>();
}

std::string config_string(const Json& v, const std::string& where) {
  if (!v.is_string()) throw ConfigError(where + ": expected a string");
  return v.get<std::string>();
}

}  // namespace

PipelineConfig parse_config(const std::string& json_text, const std::string& source,
                            const std::filesystem::path& base_dir) {
  Json root;
  try {
    root = detail::parse_document(json_text, source);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  if (!root.is_object()) throw ConfigError(source + ": config must be a JSON object");
  reject_unknown(root,
                 {"window", "seed", "selection_threshold", "lof", "bm25", "detection",
                  "selection", "generation", "paths"},
                 source);

  PipelineConfig c;
  const auto at = [&](const char* key) { return source + ":/" + key; };
  if (root.contains("window")) c.window = config_int(root["window"], at("window"));
  if (root.contains("seed")) {
    const Json& s = root["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
      throw ConfigError(at("seed") + ": expected a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  if (root.contains("selection_threshold") && !root["selection_threshold"].is_null()) {
    c.selection_threshold =
        config_number(root["selection_threshold"], at("selection_threshold"));
  }
  if (root.contains("lof")) {
    const Json& lof = root["lof"];
    if (!lof.is_object()) throw ConfigError(at("lof") + ": expected an object");
    reject_unknown(lof, {"k", "quantile"}, at("lof"));
    if (lof.contains("k")) c.lof_k = config_int(lof["k"], at("lof/k"));
    if (lof.contains("quantile")) {
      c.lof_quantile = config_number(lof["quantile"], at("lof/quantile"));
    }
  }
  if (root.contains("bm25")) {
    const Json& bm = root["bm25"];
    if (!bm.is_object()) throw ConfigError(at("bm25") + ": expected an object");
    reject_unknown(bm, {"k1", "b"}, at("bm25"));
    if (bm.contains("k1")) c.bm25.k1 = config_number(bm["k1"], at("bm25/k1"));
    if (bm.contains("b")) c.bm25.b = config_number(bm["b"], at("bm25/b"));
  }
  if (root.contains("detection")) {
    c.detection = parse_detection_method(config_string(root["detection"], at("detection")));
  }
  if (root.contains("selection")) {
    c.selection = parse_selection_method(config_string(root["selection"], at("selection")));
  }
  if (root.contains("generation")) {
    c.generation =
        parse_generation_method(config_string(root["generation"], at("generation")));
  }
  if (root.contains("paths")) {
    const Json& p = root["paths"];
    if (!p.is_object()) throw ConfigError(at("paths") + ": expected an object");
    const std::array<std::pair<const char*, std::optional<std::filesystem::path>*>, 9>
        slots{{{"knowledge", &c.paths.knowledge},
               {"logs", &c.paths.logs},
               {"labels", &c.paths.labels},
               {"vectors", &c.paths.vectors},
               {"lof_train_vectors", &c.paths.lof_train_vectors},
               {"train_logs", &c.paths.train_logs},
               {"detection_scores", &c.paths.detection_scores},
               {"selection_scores", &c.paths.selection_scores},
               {"responses", &c.paths.responses}}};
    for (const auto& [key, value] : p.items()) {
      auto it = std::find_if(slots.begin(), slots.end(),
                             [&](const auto& s) { return key == s.first; });
      if (it == slots.end()) {
        throw ConfigError(fmt::format("{}: unknown key '{}'", at("paths"), key));
      }
      if (value.is_null()) continue;
      std::filesystem::path path = config_string(value, at("paths") + "/" + key);
      if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
      *it->second = std::move(path);
    }
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, path.string(), path.parent_path());
}

// ---------------------------------------------------------------------------
// Prediction files

void check_gating(const PredictionRecord& r) {
  if (r.detected) {
    if (r.selected.empty()) {
      throw ValidationError(
          fmt::format("turn {}: detected but nothing selected", to_string(r.turn)));
    }
    if (!r.response) {
      throw ValidationError(
          fmt::format("turn {}: detected but no response", to_string(r.turn)));
    }
  } else if (!r.selected.empty() || r.response) {
    throw ValidationError(fmt::format(
        "turn {}: knowledge or response on a pass-through turn", to_string(r.turn)));
  }
}

std::string predictions_to_jsonl(PredictionFile predictions) {
  std::sort(predictions.begin(), predictions.end(),
            [](const auto& a, const auto& b) { return a.turn < b.turn; });
  std::string out;
  for (const auto& r : predictions) {
    Json j = Json::object();
    j["dialogue_id"] = r.turn.dialogue_id;
    j["turn"] = r.turn.turn;
    j["detected"] = r.detected;
    if (r.detection_score) j["score"] = *r.detection_score;
    Json selected = Json::array();
    for (const auto& k : r.selected) selected.push_back(detail::key_to_json(k));
    j["selected"] = std::move(selected);
    if (r.response) j["response"] = *r.response;
    if (r.ranking) {
      Json ranking = Json::array();
      for (const auto& c : *r.ranking) {
        Json e = detail::key_to_json(c.key);
        e["score"] = c.score;
        ranking.push_back(std::move(e));
      }
      j["ranking"] = std::move(ranking);
    }
    if (r.diagnostic) j["diagnostic"] = *r.diagnostic;
    out += detail::dump_line(j);
    out += '\n';
  }
  return out;
}

PredictionFile parse_predictions(const std::string& text, const std::string& source) {
  PredictionFile out;
  std::set<TurnKey> seen;
  detail::for_each_jsonl_text(text, source, [&](const Json& j, const std::string& where) {
    PredictionRecord r;
    r.turn.dialogue_id = detail::require_id(j, "dialogue_id", where);
    r.turn.turn = detail::require_int(j, "turn", where);
    r.detected = detail::require_bool(j, "detected", where);
    if (j.contains("score") && !j["score"].is_null()) {
      r.detection_score = detail::require_number(j, "score", where);
    }
    const Json& selected = detail::require(j, "selected", where);
    if (!selected.is_array()) throw ParseError(where, "'selected' must be a list");
    for (const auto& k : selected) r.selected.push_back(detail::key_from_json(k, where));
    if (j.contains("response") && !j["response"].is_null()) {
      r.response = detail::require_string(j, "response", where);
    }
    if (j.contains("ranking") && !j["ranking"].is_null()) {
      const Json& ranking = j["ranking"];
      if (!ranking.is_array()) throw ParseError(where, "'ranking' must be a list");
      r.ranking.emplace();
      for (const auto& e : ranking) {
        r.ranking->push_back({detail::key_from_json(e, where),
                              detail::require_number(e, "score", where)});
      }
    }
    if (j.contains("diagnostic") && !j["diagnostic"].is_null()) {
      r.diagnostic = detail::require_string(j, "diagnostic", where);
    }
    try {
      check_gating(r);
    } catch (const ValidationError& e) {
      throw ParseError(where, e.what());
    }
    if (!seen.insert(r.turn).second) {
      throw ParseError(where, fmt::format("duplicate turn {}", to_string(r.turn)));
    }
    out.push_back(std::move(r));
  });
  std::sort(out.begin(), out.end(),
            [](const auto& a, const auto& b) { return a.turn < b.turn; });
  return out;
}

PredictionFile load_predictions(const std::filesystem::path& path) {
  return parse_predictions(read_file(path), path.string());
}

// ---------------------------------------------------------------------------
// Running

Corpus load_corpus(const PipelineConfig& config) {
  if (!config.paths.knowledge || !config.paths.logs) {
    throw ConfigError("knowledge and logs paths are required");
  }
  Corpus c;
  c.kb = load_knowledge_base(*config.paths.knowledge);
  c.dialogues = load_dialogues(*config.paths.logs, config.paths.labels, &c.kb);
  return c;
}

namespace {

std::vector<TurnKey> user_turns(std::span<const Dialogue> dialogues) {
  std::vector<TurnKey> out;
  for (const auto& d : dialogues) {
    for (const auto& t : d.turns) {
      if (t.speaker == Speaker::User) out.push_back({d.dialogue_id, t.index});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

const Dialogue& require_labels(const Dialogue& d) {
  if (!d.labels) {
    throw DataError(fmt::format("dialogue '{}' has no labels", d.dialogue_id));
  }
  return d;
}

std::map<std::string, const Dialogue*> index_dialogues(std::span<const Dialogue> ds) {
  std::map<std::string, const Dialogue*> out;
  for (const auto& d : ds) out.emplace(d.dialogue_id, &d);
  return out;
}

std::vector<detection::DetectionPrediction> detect_with_lof(const PipelineConfig& config,
                                                            const Corpus& corpus) {
  const auto turns = user_turns(corpus.dialogues);
  std::vector<detection::DetectionPrediction> out;
  out.reserve(turns.size());

  if (config.paths.vectors) {
    const auto table = detection::load_vectors(*config.paths.vectors);
    const auto train_table = config.paths.lof_train_vectors
                                 ? detection::load_vectors(*config.paths.lof_train_vectors)
                                 : table;
    std::vector<detection::DenseVector> train;
    train.reserve(train_table.size());
    for (const auto& [key, v] : train_table) train.push_back(v);
    if (train.size() <= static_cast<std::size_t>(config.lof_k)) {
      throw ConfigError(fmt::format("lof.k = {} needs more than {} training vectors",
                                    config.lof_k, train.size()));
    }
    const auto model =
        detection::fit_lof(std::move(train), config.lof_k, config.lof_quantile);
    for (const auto& key : turns) {
      auto it = table.find(key);
      if (it == table.end()) {
        throw DataError(fmt::format("no utterance vector for turn {}", to_string(key)));
      }
      const double s = model.score(it->second);
      out.push_back({key, s, s > model.threshold()});
    }
    return out;
  }

  // No external embeddings: encode user utterances with TF-IDF.
  std::vector<Dialogue> train_dialogues;
  if (config.paths.train_logs) {
    train_dialogues = load_dialogues(*config.paths.train_logs);
  }
  const std::span<const Dialogue> train_source =
      config.paths.train_logs ? std::span<const Dialogue>(train_dialogues)
                              : std::span<const Dialogue>(corpus.dialogues);
  std::vector<text::TokenSequence> train_docs;
  for (const auto& d : train_source) {
    for (const auto& t : d.turns) {
      if (t.speaker == Speaker::User) train_docs.push_back(text::tokenize(t.text));
    }
  }
  if (train_docs.size() <= static_cast<std::size_t>(config.lof_k)) {
    throw ConfigError(fmt::format("lof.k = {} needs more than {} training utterances",
                                  config.lof_k, train_docs.size()));
  }
  const auto encoder = detection::TfidfEncoder::fit(train_docs);
  std::vector<detection::DenseVector> train;
  train.reserve(train_docs.size());
  for (const auto& doc : train_docs) train.push_back(encoder.encode(doc));
  const auto model = detection::fit_lof(std::move(train), config.lof_k, config.lof_quantile);
  const auto dialogues = index_dialogues(corpus.dialogues);
  for (const auto& key : turns) {
    const auto& turn = dialogues.at(key.dialogue_id)->turn(key.turn);
    const double s = model.score(encoder.encode(text::tokenize(turn.text)));
    out.push_back({key, s, s > model.threshold()});
  }
  return out;
}

}  // namespace

std::vector<detection::DetectionPrediction> run_detection(const PipelineConfig& config,
                                                          const Corpus& corpus) {
  switch (config.detection) {
    case DetectionMethod::Lof:
      return detect_with_lof(config, corpus);
    case DetectionMethod::External: {
      const auto turns = user_turns(corpus.dialogues);
      return detection::ingest_external_detection_scores(
          *config.paths.detection_scores, std::span<const TurnKey>(turns));
    }
    case DetectionMethod::Oracle: {
      std::vector<detection::DetectionPrediction> out;
      for (const auto& [key, gold] : detection_golds(corpus.dialogues)) {
        out.push_back({key, gold ? 1.0 : 0.0, gold});
      }
      return out;
    }
  }
  throw ConfigError("unknown detection method");
}

selection::CandidateScope scope_for_turn(const Dialogue& dialogue, int t) {
  if (const TurnLabel* l = dialogue.label_for(t); l && !l->knowledge.empty()) {
    return selection::CandidateScope::of(l->knowledge.front());
  }
  return selection::CandidateScope::global();
}

namespace {

class Selector {
 public:
  Selector(const PipelineConfig& config, const Corpus& corpus,
           const std::map<TurnKey, selection::CandidateScope>& scopes)
      : config_(config), corpus_(corpus) {
    if (config.selection == SelectionMethod::External) {
      for (auto& r : selection::ingest_external_selection_scores(
               *config.paths.selection_scores, corpus.kb, scopes)) {
        external_.emplace(r.turn, std::move(r));
      }
    }
  }

  selection::Ranking rank(const Dialogue& d, int t, const selection::CandidateScope& scope) {
    const TurnKey key{d.dialogue_id, t};
    switch (config_.selection) {
      case SelectionMethod::Tfidf:
        return selection::score_tfidf(index_for(scope), build_context(d, t, config_.window),
                                      key);
      case SelectionMethod::Bm25:
        return selection::score_bm25(index_for(scope), build_context(d, t, config_.window),
                                     config_.bm25, key);
      case SelectionMethod::External: {
        auto it = external_.find(key);
        if (it == external_.end()) {
          throw DataError(fmt::format("no selection scores for turn {}", to_string(key)));
        }
        return it->second;
      }
      case SelectionMethod::Oracle: {
        const TurnLabel* l = d.label_for(t);
        if (!l || l->knowledge.empty()) {
          throw DataError(fmt::format("oracle selection: turn {} has no gold knowledge",
                                      to_string(key)));
        }
        std::vector<selection::ScoredCandidate> items;
        for (const auto& c : candidates_for(scope)) {
          const bool gold = std::find(l->knowledge.begin(), l->knowledge.end(), c.key) !=
                            l->knowledge.end();
          items.push_back({c.key, gold ? 1.0 : 0.0});
        }
        return selection::Ranking::sorted(key, std::move(items));
      }
    }
    throw ConfigError("unknown selection method");
  }

 private:
  const std::vector<selection::CandidateDocument>& candidates_for(
      const selection::CandidateScope& scope) {
    auto it = candidates_.find(scope);
    if (it == candidates_.end()) {
      auto docs = selection::build_candidates(corpus_.kb, scope);
      if (docs.empty()) {
        throw DataError(fmt::format("candidate scope {} is empty", scope.to_string()));
      }
      it = candidates_.emplace(scope, std::move(docs)).first;
    }
    return it->second;
  }

  const selection::TermIndex& index_for(const selection::CandidateScope& scope) {
    auto it = indexes_.find(scope);
    if (it == indexes_.end()) {
      it = indexes_.emplace(scope, selection::TermIndex::build(candidates_for(scope))).first;
    }
    return it->second;
  }

  const PipelineConfig& config_;
  const Corpus& corpus_;
  std::map<selection::CandidateScope, std::vector<selection::CandidateDocument>> candidates_;
  std::map<selection::CandidateScope, selection::TermIndex> indexes_;
  std::map<TurnKey, selection::Ranking> external_;
};

}  // namespace

PredictionFile run_end_to_end(const PipelineConfig& config, const Corpus& corpus) {
  config.validate();
  const auto dialogues = index_dialogues(corpus.dialogues);
  const auto detections = run_detection(config, corpus);

  std::map<TurnKey, selection::CandidateScope> scopes;
  std::vector<TurnKey> detected;
  for (const auto& p : detections) {
    if (!p.predicted) continue;
    detected.push_back(p.turn);
    scopes.emplace(p.turn, scope_for_turn(*dialogues.at(p.turn.dialogue_id), p.turn.turn));
  }

  Selector selector(config, corpus, scopes);
  std::map<TurnKey, generation::GeneratedResponse> external_responses;
  if (config.generation == GenerationMethod::External) {
    for (auto& r : generation::ingest_external_responses(*config.paths.responses,
                                                         std::span<const TurnKey>(detected))) {
      external_responses.emplace(r.turn, std::move(r));
    }
  }

  PredictionFile out;
  out.reserve(detections.size());
  for (const auto& p : detections) {
    PredictionRecord r;
    r.turn = p.turn;
    r.detected = p.predicted;
    r.detection_score = p.score;
    if (p.predicted) {
      const Dialogue& d = *dialogues.at(p.turn.dialogue_id);
      const auto& scope = scopes.at(p.turn);
      auto ranking = selector.rank(d, p.turn.turn, scope);
      if (ranking.empty()) {
        throw DataError(fmt::format("turn {}: no candidates in scope {}",
                                    to_string(p.turn), scope.to_string()));
      }
      if (config.selection_threshold) {
        r.selected = selection::select_above(ranking, *config.selection_threshold);
      } else {
        r.selected = {selection::select_top1(ranking)};
      }
      std::vector<std::string> notes;
      if (scope.kind == selection::CandidateScope::Kind::Global) notes.emplace_back("unscoped");
      if (ranking.items.front().score <= 0.0) notes.emplace_back("low_score");
      if (!notes.empty()) r.diagnostic = fmt::format("{}", fmt::join(notes, ","));
      r.ranking = std::move(ranking.items);

      switch (config.generation) {
        case GenerationMethod::Extract: {
          std::vector<KnowledgeSnippet> snippets;
          for (const auto& k : r.selected) snippets.push_back(corpus.kb.at(k));
          r.response = generation::extract_answer(snippets, config.seed, p.turn).text;
          break;
        }
        case GenerationMethod::External:
          r.response = external_responses.at(p.turn).text;
          break;
        case GenerationMethod::Oracle: {
          const TurnLabel* l = d.label_for(p.turn.turn);
          if (!l || !l->response) {
            throw DataError(fmt::format("oracle generation: turn {} has no gold response",
                                        to_string(p.turn)));
          }
          r.response = *l->response;
          break;
        }
      }
    }
    check_gating(r);
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.turn < b.turn; });
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

std::map<TurnKey, bool> detection_golds(std::span<const Dialogue> dialogues) {
  std::map<TurnKey, bool> out;
  for (const auto& d : dialogues) {
    require_labels(d);
    for (const auto& t : d.turns) {
      if (t.speaker != Speaker::User) continue;
      const TurnLabel* l = d.label_for(t.index);
      out.emplace(TurnKey{d.dialogue_id, t.index}, l && l->target);
    }
  }
  return out;
}

metrics::SelectionGolds selection_golds(std::span<const Dialogue> dialogues) {
  metrics::SelectionGolds out;
  for (const auto& d : dialogues) {
    for (const auto& l : require_labels(d).labels.value()) {
      if (l.target && !l.knowledge.empty()) {
        out.emplace(TurnKey{d.dialogue_id, l.turn_index}, l.knowledge);
      }
    }
  }
  return out;
}

std::map<TurnKey, std::string> response_golds(std::span<const Dialogue> dialogues) {
  std::map<TurnKey, std::string> out;
  for (const auto& d : dialogues) {
    for (const auto& l : require_labels(d).labels.value()) {
      if (l.target && l.response) out.emplace(TurnKey{d.dialogue_id, l.turn_index}, *l.response);
    }
  }
  return out;
}

metrics::Reports evaluate(const PredictionFile& predictions,
                          std::span<const Dialogue> dialogues, const EvaluationSet& which) {
  std::map<TurnKey, const PredictionRecord*> by_turn;
  for (const auto& r : predictions) {
    if (!by_turn.emplace(r.turn, &r).second) {
      throw DataError(fmt::format("duplicate prediction for turn {}", to_string(r.turn)));
    }
  }
  const auto record = [&](const TurnKey& key) -> const PredictionRecord& {
    auto it = by_turn.find(key);
    if (it == by_turn.end()) {
      throw DataError(fmt::format("coverage mismatch: no prediction for turn {}",
                                  to_string(key)));
    }
    return *it->second;
  };

  metrics::Reports reports;
  if (which.detection) {
    const auto golds = detection_golds(dialogues);
    std::vector<detection::DetectionPrediction> preds;
    preds.reserve(golds.size());
    for (const auto& [key, gold] : golds) {
      const auto& r = record(key);
      preds.push_back({key, r.detection_score.value_or(r.detected ? 1.0 : 0.0), r.detected});
    }
    reports.detection = metrics::detection_metrics(preds, golds);
  }
  if (which.selection) {
    const auto golds = selection_golds(dialogues);
    if (!golds.empty()) {
      bool full = true;
      std::vector<selection::Ranking> rankings;
      for (const auto& [key, gold] : golds) {
        const auto& r = record(key);
        selection::Ranking ranking{key, {}};
        if (r.detected) {
          if (r.ranking) {
            ranking.items = *r.ranking;
          } else {
            full = false;
            for (const auto& k : r.selected) ranking.items.push_back({k, 0.0});
          }
        }
        rankings.push_back(std::move(ranking));
      }
      reports.selection = metrics::selection_metrics(
          rankings, golds,
          full ? metrics::RankingCoverage::Full : metrics::RankingCoverage::Partial);
    }
  }
  if (which.generation) {
    const auto golds = response_golds(dialogues);
    if (!golds.empty()) {
      std::vector<std::string> hyps;
      std::vector<std::string> refs;
      for (const auto& [key, ref] : golds) {
        const auto& r = record(key);
        hyps.push_back(r.detected ? r.response.value_or("") : "");
        refs.push_back(ref);
      }
      reports.generation = metrics::generation_metrics(hyps, refs);
    }
  }
  return reports;
}

// ---------------------------------------------------------------------------
// Synthetic fixtures

void FixtureSizes::validate() const {
  const std::array<std::pair<const char*, int>, 5> positive{{
      {"domains", domains},
      {"entities_per_domain", entities_per_domain},
      {"docs_per_entity", docs_per_entity},
      {"dialogues", dialogues},
      {"seeking_per_dialogue", seeking_per_dialogue},
  }};
  for (const auto& [name, v] : positive) {
    if (v < 1) throw ConfigError(fmt::format("fixture {} must be >= 1, got {}", name, v));
  }
  if (domain_docs < 0) throw ConfigError("fixture domain_docs must be >= 0");
  if (filler_turns < 0) throw ConfigError("fixture filler_turns must be >= 0");
  const long scopes = static_cast<long>(domains) * entities_per_domain +
                      (domain_docs > 0 ? domains : 0);
  if (seeking_per_dialogue > scopes) {
    throw ConfigError(fmt::format(
        "fixture seeking_per_dialogue = {} exceeds the {} available scopes",
        seeking_per_dialogue, scopes));
  }
}

namespace {

constexpr std::array<const char*, 5> kDomainNames{"hotel", "restaurant", "attraction",
                                                  "taxi", "train"};

constexpr std::array<const char*, 8> kUserFiller{
    "i am looking for somewhere in the centre of town",
    "can you book it for two people on friday",
    "what area is it located in",
    "i would like something in the moderate price range",
    "please make a reservation for three nights",
    "could you give me the phone number",
    "is there anything available on the north side",
    "that sounds good , what time does it open",
};

constexpr std::array<const char*, 6> kAgentFiller{
    "i have several options that match your request .",
    "sure , the booking was successful .",
    "it is located in the east part of town .",
    "what day would you like to go ?",
    "here is the information you asked for .",
    "is there anything else i can help with ?",
};

// Pseudo-words that cannot collide with the filler vocabulary.
class WordMaker {
 public:
  explicit WordMaker(Rng& rng) : rng_(rng) {}

  std::string next() {
    static constexpr std::string_view kOnset = "bdfgklmnprstvz";
    static constexpr std::string_view kVowel = "aeiou";
    for (;;) {
      std::string w;
      for (int i = 0; i < 4; ++i) {
        w += kOnset[rng_.uniform_index(kOnset.size())];
        w += kVowel[rng_.uniform_index(kVowel.size())];
      }
      w += 'x';
      if (used_.insert(w).second) return w;
    }
  }

 private:
  Rng& rng_;
  std::set<std::string> used_;
};

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

struct FixtureDoc {
  KnowledgeKey key;
  std::string keyword;
  std::string answer;
};

}  // namespace

FixtureFiles make_fixture(std::uint64_t seed, const FixtureSizes& sizes) {
  sizes.validate();
  Rng rng(seed);
  WordMaker words(rng);

  std::vector<KnowledgeSnippet> snippets;
  std::map<EntityRef, std::string> entity_names;
  std::vector<std::string> domains;
  // Scopes in a fixed order; each holds the docs a seeking turn may target.
  std::vector<std::vector<FixtureDoc>> scopes;
  std::vector<std::string> scope_subject;  // what the user names in the turn

  for (int di = 0; di < sizes.domains; ++di) {
    std::string domain = di < static_cast<int>(kDomainNames.size())
                             ? kDomainNames[static_cast<std::size_t>(di)]
                             : fmt::format("domain{}", di);
    domains.push_back(domain);

    if (sizes.domain_docs > 0) {
      std::vector<FixtureDoc> docs;
      for (int k = 0; k < sizes.domain_docs; ++k) {
        const std::string kw = words.next();
        KnowledgeKey key{domain, std::nullopt, std::to_string(k)};
        std::string answer = fmt::format("every {} in town allows {} on request .", domain, kw);
        snippets.push_back({key, std::nullopt,
                            fmt::format("is {} allowed at the {} ?", kw, domain), answer});
        docs.push_back({key, kw, answer});
      }
      scopes.push_back(std::move(docs));
      scope_subject.push_back("the " + domain);
    }

    for (int ei = 0; ei < sizes.entities_per_domain; ++ei) {
      const std::string entity_id = std::to_string(di * sizes.entities_per_domain + ei);
      const std::string name = capitalize(words.next()) + " " + capitalize(domain);
      entity_names.emplace(EntityRef{domain, entity_id}, name);
      std::vector<FixtureDoc> docs;
      for (int k = 0; k < sizes.docs_per_entity; ++k) {
        const std::string kw = words.next();
        KnowledgeKey key{domain, entity_id, std::to_string(k)};
        std::string answer = fmt::format("yes , {} offers {} to all guests .", name, kw);
        snippets.push_back({key, name, fmt::format("does {} have {} ?", name, kw),
                            answer + "\n\nplease ask the staff for details ."});
        docs.push_back({key, kw, answer});
      }
      scopes.push_back(std::move(docs));
      scope_subject.push_back(name);
    }
  }

  KnowledgeBase kb(snippets, entity_names, domains);

  std::vector<Dialogue> dialogues;
  const int width = static_cast<int>(std::to_string(sizes.dialogues).size());
  for (int n = 0; n < sizes.dialogues; ++n) {
    Dialogue d;
    d.dialogue_id = fmt::format("fx-{:0{}}", n + 1, width);
    d.labels.emplace();

    // Distinct scopes per dialogue so that no earlier seeking turn in the
    // window shares candidates with a later one.
    std::vector<std::size_t> order(scopes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (int s = 0; s < sizes.seeking_per_dialogue; ++s) {
      const std::size_t i = static_cast<std::size_t>(s);
      std::swap(order[i], order[i + rng.uniform_index(order.size() - i)]);
    }

    const auto add = [&](Speaker sp, std::string textv) {
      d.turns.push_back({sp, std::move(textv), static_cast<int>(d.turns.size()) + 1});
      return d.turns.back().index;
    };
    for (int s = 0; s < sizes.seeking_per_dialogue; ++s) {
      for (int f = 0; f < sizes.filler_turns; ++f) {
        const int t = add(Speaker::User, kUserFiller[rng.uniform_index(kUserFiller.size())]);
        d.labels->push_back({t, false, {}, std::nullopt});
        add(Speaker::Agent, kAgentFiller[rng.uniform_index(kAgentFiller.size())]);
      }
      const std::size_t scope = order[static_cast<std::size_t>(s)];
      const auto& doc = scopes[scope][rng.uniform_index(scopes[scope].size())];
      const int t = add(Speaker::User, fmt::format("one more thing , is {} possible at {} ?",
                                                   doc.keyword, scope_subject[scope]));
      d.labels->push_back({t, true, {doc.key}, doc.answer});
      add(Speaker::Agent, doc.answer);
    }
    const int t = add(Speaker::User, "thanks , that is all i need .");
    d.labels->push_back({t, false, {}, std::nullopt});
    add(Speaker::Agent, "you are welcome , goodbye .");
    dialogues.push_back(std::move(d));
  }

  return {knowledge_base_to_json(kb), logs_to_json(dialogues), labels_to_json(dialogues)};
}

void write_fixture(const FixtureFiles& files, const std::filesystem::path& dir) {
  write_file(dir / "knowledge.json", files.knowledge);
  write_file(dir / "logs.json", files.logs);
  write_file(dir / "labels.json", files.labels);
}

}  // namespace ukad::pipeline
