// ukad: command-line front end for the knowledge-access dialogue toolkit.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ukad/corpus.hpp"
#include "ukad/detection.hpp"
#include "ukad/errors.hpp"
#include "ukad/generation.hpp"
#include "ukad/metrics.hpp"
#include "ukad/pipeline.hpp"
#include "ukad/random.hpp"
#include "ukad/selection.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

using namespace ukad;

// Flags shared by every command that runs part of the pipeline. Each one,
// when given, overrides the matching config-file value.
struct CommonFlags {
  std::optional<fs::path> config;
  std::optional<fs::path> knowledge, logs, labels, vectors, lof_train_vectors, train_logs;
  std::optional<fs::path> detection_scores, selection_scores, responses;
  std::optional<int> window, lof_k;
  std::optional<double> lof_quantile, bm25_k1, bm25_b, selection_threshold;
  std::optional<std::string> detection, selection, generation;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> out;

  void attach(CLI::App& app, bool methods) {
    app.add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--knowledge", knowledge, "knowledge JSON");
    app.add_option("--logs", logs, "dialogue logs JSON");
    app.add_option("--labels", labels, "turn labels JSON");
    app.add_option("--window", window, "dialogue context window w");
    app.add_option("--seed", seed, "random seed");
    app.add_option("--out,-o", out, "output file (default: stdout)");
    if (!methods) return;
    app.add_option("--vectors", vectors, "utterance vectors JSONL for LOF");
    app.add_option("--lof-train-vectors", lof_train_vectors, "LOF training vectors JSONL");
    app.add_option("--train-logs", train_logs, "logs used to fit LOF without vectors");
    app.add_option("--detection-scores", detection_scores, "external detection scores");
    app.add_option("--selection-scores", selection_scores, "external selection scores");
    app.add_option("--responses", responses, "external responses JSONL");
    app.add_option("--lof-k", lof_k, "LOF neighbours k");
    app.add_option("--lof-quantile", lof_quantile, "LOF threshold quantile");
    app.add_option("--bm25-k1", bm25_k1, "BM25 k1");
    app.add_option("--bm25-b", bm25_b, "BM25 b");
    app.add_option("--selection-threshold", selection_threshold,
                   "select every candidate scoring at least this");
    app.add_option("--detection", detection, "lof | external | oracle");
    app.add_option("--selection", selection, "tfidf | bm25 | external | oracle");
    app.add_option("--generation", generation, "extract | external | oracle");
  }

  pipeline::PipelineConfig resolve() const {
    pipeline::PipelineConfig c = config ? pipeline::load_config(*config) : pipeline::PipelineConfig{};
    auto& p = c.paths;
    if (knowledge) p.knowledge = knowledge;
    if (logs) p.logs = logs;
    if (labels) p.labels = labels;
    if (vectors) p.vectors = vectors;
    if (lof_train_vectors) p.lof_train_vectors = lof_train_vectors;
    if (train_logs) p.train_logs = train_logs;
    if (detection_scores) p.detection_scores = detection_scores;
    if (selection_scores) p.selection_scores = selection_scores;
    if (responses) p.responses = responses;
    if (window) c.window = *window;
    if (lof_k) c.lof_k = *lof_k;
    if (lof_quantile) c.lof_quantile = *lof_quantile;
    if (bm25_k1) c.bm25.k1 = *bm25_k1;
    if (bm25_b) c.bm25.b = *bm25_b;
    if (selection_threshold) c.selection_threshold = selection_threshold;
    if (detection) c.detection = pipeline::parse_detection_method(*detection);
    if (selection) c.selection = pipeline::parse_selection_method(*selection);
    if (generation) c.generation = pipeline::parse_generation_method(*generation);
    if (seed) c.seed = *seed;
    return c;
  }
};

void emit(const std::optional<fs::path>& out, const std::string& content) {
  if (out) {
    write_file(*out, content);
  } else {
    std::fwrite(content.data(), 1, content.size(), stdout);
  }
}

Json key_json(const KnowledgeKey& k) {
  Json j = Json::object();
  j["domain"] = k.domain;
  if (k.entity_id) j["entity_id"] = *k.entity_id;
  j["doc_id"] = k.doc_id;
  return j;
}

std::string line(const Json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

pipeline::Corpus corpus_for(const pipeline::PipelineConfig& c) {
  if (!c.paths.knowledge || !c.paths.logs) {
    throw ConfigError("--knowledge and --logs are required");
  }
  return pipeline::load_corpus(c);
}

const Dialogue& dialogue_of(const pipeline::Corpus& corpus, const TurnKey& key) {
  for (const auto& d : corpus.dialogues) {
    if (d.dialogue_id == key.dialogue_id) return d;
  }
  throw DataError(fmt::format("unknown dialogue '{}'", key.dialogue_id));
}

// Turns to run a component on: detected turns from a predictions file, or
// every gold knowledge-seeking turn.
std::vector<TurnKey> component_turns(const pipeline::Corpus& corpus,
                                     const std::optional<fs::path>& detections) {
  std::vector<TurnKey> turns;
  if (detections) {
    for (const auto& p : detection::load_predictions(*detections)) {
      if (p.predicted) turns.push_back(p.turn);
    }
    return turns;
  }
  for (const auto& [key, gold] : pipeline::detection_golds(corpus.dialogues)) {
    if (gold) turns.push_back(key);
  }
  return turns;
}

// --- commands --------------------------------------------------------------

int cmd_validate(const CommonFlags& f) {
  const auto c = f.resolve();
  if (!c.paths.knowledge) throw ConfigError("--knowledge is required");
  const KnowledgeBase kb = load_knowledge_base(*c.paths.knowledge);
  std::size_t n_dialogues = 0;
  if (c.paths.logs) {
    n_dialogues = load_dialogues(*c.paths.logs, c.paths.labels, &kb).size();
  } else if (c.paths.labels) {
    throw ConfigError("--labels needs --logs");
  }
  emit(f.out, fmt::format("ok: {} snippets, {} dialogues\n", kb.size(), n_dialogues));
  return 0;
}

int cmd_stats(const CommonFlags& f) {
  const auto corpus = corpus_for(f.resolve());
  const CorpusStats s = corpus_stats(corpus.kb, corpus.dialogues);
  Json j = {{"n_dialogues", s.n_dialogues},
            {"n_augmented_turns", s.n_augmented_turns},
            {"n_utterances", s.n_utterances},
            {"n_domain_snippets", s.n_domain_snippets},
            {"n_entity_snippets", s.n_entity_snippets},
            {"n_entities", s.n_entities}};
  emit(f.out, j.dump(2) + "\n");
  return 0;
}

int cmd_detect(const CommonFlags& f) {
  auto c = f.resolve();
  c.validate();
  const auto corpus = pipeline::load_corpus(c);
  emit(f.out, detection::predictions_to_jsonl(pipeline::run_detection(c, corpus)));
  return 0;
}

int cmd_select(const CommonFlags& f, const std::optional<fs::path>& detections) {
  auto c = f.resolve();
  if (c.selection != pipeline::SelectionMethod::Tfidf &&
      c.selection != pipeline::SelectionMethod::Bm25) {
    throw ConfigError("select runs the tfidf or bm25 baseline");
  }
  const auto corpus = corpus_for(c);
  std::map<selection::CandidateScope, selection::TermIndex> indexes;
  std::string out;
  for (const auto& key : component_turns(corpus, detections)) {
    const Dialogue& d = dialogue_of(corpus, key);
    const auto scope = pipeline::scope_for_turn(d, key.turn);
    auto it = indexes.find(scope);
    if (it == indexes.end()) {
      const auto docs = selection::build_candidates(corpus.kb, scope);
      if (docs.empty()) throw DataError("candidate scope " + scope.to_string() + " is empty");
      it = indexes.emplace(scope, selection::TermIndex::build(docs)).first;
    }
    const auto context = build_context(d, key.turn, c.window);
    const auto ranking = c.selection == pipeline::SelectionMethod::Bm25
                             ? selection::score_bm25(it->second, context, c.bm25, key)
                             : selection::score_tfidf(it->second, context, key);
    for (const auto& item : ranking.items) {
      Json j = {{"dialogue_id", key.dialogue_id}, {"turn", key.turn}};
      j.update(key_json(item.key));
      j["score"] = item.score;
      out += line(j);
    }
  }
  emit(f.out, out);
  return 0;
}

int cmd_extract(const CommonFlags& f, const std::optional<fs::path>& selections) {
  const auto c = f.resolve();
  const auto corpus = corpus_for(c);
  std::vector<generation::GeneratedResponse> responses;
  const auto golds = pipeline::selection_golds(corpus.dialogues);
  if (selections) {
    std::map<TurnKey, selection::CandidateScope> scopes;
    for (const auto& [key, keys] : golds) {
      scopes.emplace(key, selection::CandidateScope::of(keys.front()));
    }
    for (const auto& r :
         selection::ingest_external_selection_scores(*selections, corpus.kb, scopes, false)) {
      const auto& snippet = corpus.kb.at(selection::select_top1(r));
      responses.push_back(generation::extract_answer({&snippet, 1}, c.seed, r.turn));
    }
  } else {
    for (const auto& [key, keys] : golds) {
      std::vector<KnowledgeSnippet> snippets;
      for (const auto& k : keys) snippets.push_back(corpus.kb.at(k));
      responses.push_back(generation::extract_answer(snippets, c.seed, key));
    }
  }
  emit(f.out, generation::responses_to_jsonl(responses));
  return 0;
}

int cmd_prep_negatives(const CommonFlags& f, int m) {
  const auto c = f.resolve();
  if (m < 1) throw ConfigError("--negatives must be >= 1");
  const auto corpus = corpus_for(c);
  std::string out;
  for (const auto& [key, keys] : pipeline::selection_golds(corpus.dialogues)) {
    const std::uint64_t turn_seed =
        Rng::for_turn(c.seed, key.dialogue_id, key.turn).engine()();
    const auto sample = selection::sample_negatives(corpus.kb, keys.front(), m, turn_seed);
    Json negatives = Json::array();
    for (const auto& k : sample.negatives) negatives.push_back(key_json(k));
    Json j = {{"dialogue_id", key.dialogue_id},
              {"turn", key.turn},
              {"positive", key_json(keys.front())},
              {"negatives", std::move(negatives)}};
    if (sample.insufficient) j["insufficient"] = true;
    out += line(j);
  }
  emit(f.out, out);
  return 0;
}

int cmd_run(const CommonFlags& f, const std::optional<fs::path>& report) {
  const auto c = f.resolve();
  c.validate();
  const auto corpus = pipeline::load_corpus(c);
  const auto predictions = pipeline::run_end_to_end(c, corpus);
  emit(f.out, pipeline::predictions_to_jsonl(predictions));
  if (report) {
    if (!c.paths.labels) throw ConfigError("--report needs --labels");
    write_file(*report, metrics::reports_to_json(pipeline::evaluate(predictions, corpus.dialogues)));
  }
  return 0;
}

struct EvaluateFlags {
  std::optional<fs::path> predictions, detections, detection_scores, selections,
      selection_scores, responses, votes;
  std::vector<std::string> only;
};

int cmd_evaluate(const CommonFlags& f, const EvaluateFlags& e) {
  const auto c = f.resolve();
  metrics::Reports reports;
  const bool needs_corpus =
      e.predictions || e.detections || e.detection_scores || e.selections ||
      e.selection_scores || e.responses;
  if (!needs_corpus && !e.votes) {
    throw ConfigError(
        "nothing to evaluate: give --predictions, --detections, --detection-scores, "
        "--selections, --selection-scores, --responses or --votes");
  }
  if (needs_corpus) {
    if (!c.paths.labels) throw ConfigError("--labels is required");
    const auto corpus = corpus_for(c);
    pipeline::EvaluationSet which;
    if (!e.only.empty()) {
      which = {false, false, false};
      for (const auto& o : e.only) {
        if (o == "detection") which.detection = true;
        else if (o == "selection") which.selection = true;
        else if (o == "generation") which.generation = true;
        else throw ConfigError("--only takes detection, selection or generation");
      }
    }
    if (e.predictions) {
      reports = pipeline::evaluate(pipeline::load_predictions(*e.predictions),
                                   corpus.dialogues, which);
    }
    if (e.detections) {
      const auto golds = pipeline::detection_golds(corpus.dialogues);
      reports.detection =
          metrics::detection_metrics(detection::load_predictions(*e.detections), golds);
    }
    if (e.detection_scores) {
      const auto golds = pipeline::detection_golds(corpus.dialogues);
      std::vector<TurnKey> turns;
      for (const auto& [key, gold] : golds) turns.push_back(key);
      const auto preds = detection::ingest_external_detection_scores(
          *e.detection_scores, std::span<const TurnKey>(turns));
      reports.detection = metrics::detection_metrics(preds, golds);
    }
    if (e.selections || e.selection_scores) {
      const auto golds = pipeline::selection_golds(corpus.dialogues);
      std::map<TurnKey, selection::CandidateScope> scopes;
      for (const auto& [key, keys] : golds) {
        scopes.emplace(key, selection::CandidateScope::of(keys.front()));
      }
      const bool external = e.selection_scores.has_value();
      const auto rankings = selection::ingest_external_selection_scores(
          external ? *e.selection_scores : *e.selections, corpus.kb, scopes, external);
      reports.selection = metrics::selection_metrics(rankings, golds);
    }
    if (e.responses) {
      const auto golds = pipeline::response_golds(corpus.dialogues);
      std::vector<TurnKey> turns;
      for (const auto& [key, ref] : golds) turns.push_back(key);
      std::map<TurnKey, std::string> hyp;
      for (auto& r : generation::ingest_external_responses(*e.responses,
                                                           std::span<const TurnKey>(turns))) {
        hyp.emplace(r.turn, std::move(r.text));
      }
      std::vector<std::string> hyps, refs;
      for (const auto& [key, ref] : golds) {
        hyps.push_back(hyp.at(key));
        refs.push_back(ref);
      }
      reports.generation = metrics::generation_metrics(hyps, refs);
    }
  }
  if (e.votes) {
    std::vector<std::vector<metrics::Vote>> judgments;
    for (auto& r : metrics::load_votes(*e.votes)) judgments.push_back(std::move(r.votes));
    reports.human_eval = metrics::human_eval_majority(judgments);
  }
  emit(f.out, metrics::reports_to_json(reports));
  return 0;
}

int cmd_make_fixture(std::uint64_t seed, const pipeline::FixtureSizes& sizes,
                     const fs::path& dir) {
  pipeline::write_fixture(pipeline::make_fixture(seed, sizes), dir);
  std::cout << fmt::format("wrote {}/knowledge.json, logs.json, labels.json\n", dir.string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unstructured-knowledge access for task-oriented dialogue"};
  app.require_subcommand(1);

  CommonFlags validate_f, stats_f, detect_f, select_f, extract_f, neg_f, run_f, eval_f;

  auto* validate = app.add_subcommand("validate", "check knowledge, logs and labels");
  validate_f.attach(*validate, false);

  auto* stats = app.add_subcommand("stats", "corpus statistics as JSON");
  stats_f.attach(*stats, false);

  auto* detect = app.add_subcommand("detect", "knowledge-seeking turn detection");
  detect_f.attach(*detect, true);

  std::optional<fs::path> select_detections;
  auto* select = app.add_subcommand("select", "rank in-scope snippets (tfidf or bm25)");
  select_f.attach(*select, true);
  select->add_option("--detections", select_detections,
                     "detection output; default is every gold knowledge-seeking turn");

  std::optional<fs::path> extract_selections;
  auto* extract = app.add_subcommand("extract", "answer-extraction responses");
  extract_f.attach(*extract, false);
  extract->add_option("--selections", extract_selections,
                      "selection scores; default is the gold knowledge");

  int negatives = selection::kDefaultNegatives;
  auto* neg = app.add_subcommand("prep-negatives", "sample ranking negatives per gold turn");
  neg_f.attach(*neg, false);
  neg->add_option("--negatives,-m", negatives, "negatives per positive")->capture_default_str();

  std::optional<fs::path> run_report;
  auto* run = app.add_subcommand("run", "end-to-end pipeline");
  run_f.attach(*run, true);
  run->add_option("--report", run_report, "also evaluate against --labels into this file");

  EvaluateFlags eval_opts;
  auto* evaluate = app.add_subcommand("evaluate", "compute metric reports");
  eval_f.attach(*evaluate, false);
  evaluate->add_option("--predictions", eval_opts.predictions, "run output");
  evaluate->add_option("--detections", eval_opts.detections, "detect output");
  evaluate->add_option("--detection-scores", eval_opts.detection_scores,
                       "external detection scores JSONL, in [0, 1]")
      ->excludes("--detections");
  evaluate->add_option("--selections", eval_opts.selections, "select output");
  evaluate->add_option("--selection-scores", eval_opts.selection_scores,
                       "external selection scores JSONL, in [0, 1]")
      ->excludes("--selections");
  evaluate->add_option("--responses", eval_opts.responses, "responses JSONL");
  evaluate->add_option("--votes", eval_opts.votes, "human-evaluation votes JSONL");
  evaluate->add_option("--only", eval_opts.only, "restrict --predictions reports")
      ->delimiter(',');

  std::uint64_t fixture_seed = 0;
  pipeline::FixtureSizes sizes;
  fs::path fixture_dir;
  auto* fixture = app.add_subcommand("make-fixture", "write a synthetic corpus");
  fixture->add_option("--seed", fixture_seed, "random seed")->capture_default_str();
  fixture->add_option("--out,-o", fixture_dir, "output directory")->required();
  fixture->add_option("--domains", sizes.domains)->capture_default_str();
  fixture->add_option("--entities", sizes.entities_per_domain)->capture_default_str();
  fixture->add_option("--docs-per-entity", sizes.docs_per_entity)->capture_default_str();
  fixture->add_option("--domain-docs", sizes.domain_docs)->capture_default_str();
  fixture->add_option("--dialogues", sizes.dialogues)->capture_default_str();
  fixture->add_option("--seeking", sizes.seeking_per_dialogue)->capture_default_str();
  fixture->add_option("--filler", sizes.filler_turns)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*validate) return cmd_validate(validate_f);
    if (*stats) return cmd_stats(stats_f);
    if (*detect) return cmd_detect(detect_f);
    if (*select) return cmd_select(select_f, select_detections);
    if (*extract) return cmd_extract(extract_f, extract_selections);
    if (*neg) return cmd_prep_negatives(neg_f, negatives);
    if (*run) return cmd_run(run_f, run_report);
    if (*evaluate) return cmd_evaluate(eval_f, eval_opts);
    if (*fixture) return cmd_make_fixture(fixture_seed, sizes, fixture_dir);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
