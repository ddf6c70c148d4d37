#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "ukad/errors.hpp"
#include "ukad/pipeline.hpp"

using namespace ukad;
using namespace ukad::pipeline;

namespace {

const std::filesystem::path kSample = std::filesystem::path(UKAD_TEST_DATA_DIR) / "sample";

PipelineConfig sample_config() {
  PipelineConfig c;
  c.paths.knowledge = kSample / "knowledge.json";
  c.paths.logs = kSample / "logs.json";
  c.paths.labels = kSample / "labels.json";
  return c;
}

PipelineConfig oracle_config() {
  auto c = sample_config();
  c.detection = DetectionMethod::Oracle;
  return c;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ukad_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(Config, ParsesAndResolvesRelativePaths) {
  const auto c = parse_config(R"({
    "window": 3, "seed": 9, "selection_threshold": 0.2,
    "lof": {"k": 7, "quantile": 0.8}, "bm25": {"k1": 1.5, "b": 0.5},
    "detection": "oracle", "selection": "bm25", "generation": "extract",
    "paths": {"knowledge": "kb.json", "logs": "/abs/logs.json"}
  })",
                              "cfg.json", "/base");
  EXPECT_EQ(c.window, 3);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.selection_threshold, 0.2);
  EXPECT_EQ(c.lof_k, 7);
  EXPECT_EQ(c.lof_quantile, 0.8);
  EXPECT_EQ(c.bm25.k1, 1.5);
  EXPECT_EQ(c.bm25.b, 0.5);
  EXPECT_EQ(c.detection, DetectionMethod::Oracle);
  EXPECT_EQ(c.selection, SelectionMethod::Bm25);
  EXPECT_EQ(*c.paths.knowledge, std::filesystem::path("/base/kb.json"));
  EXPECT_EQ(*c.paths.logs, std::filesystem::path("/abs/logs.json"));
}

TEST(Config, DefaultsAndRejections) {
  const auto c = parse_config("{}");
  EXPECT_EQ(c.window, 5);
  EXPECT_EQ(c.lof_k, 20);
  EXPECT_EQ(c.lof_quantile, 0.9);
  EXPECT_EQ(c.detection, DetectionMethod::Lof);
  EXPECT_EQ(c.selection, SelectionMethod::Tfidf);
  EXPECT_THROW(parse_config(R"({"windw": 3})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"lof": {"kk": 3}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"detection": "svm"})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"paths": {"kb": "x"}})"), ConfigError);
  EXPECT_THROW(parse_detection_method("LOF "), ConfigError);
  EXPECT_EQ(parse_selection_method(to_string(SelectionMethod::External)),
            SelectionMethod::External);
}

TEST(Config, ValidateRejectsMissingInputs) {
  auto c = sample_config();
  c.detection = DetectionMethod::External;
  EXPECT_THROW(c.validate(), ConfigError);
  c = sample_config();
  c.selection = SelectionMethod::External;
  EXPECT_THROW(c.validate(), ConfigError);
  c = sample_config();
  c.generation = GenerationMethod::External;
  EXPECT_THROW(c.validate(), ConfigError);
  c = sample_config();
  c.paths.logs = kSample / "missing.json";
  EXPECT_THROW(c.validate(), ConfigError);
  c = sample_config();
  c.window = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = sample_config();
  c.lof_quantile = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = oracle_config();
  c.paths.labels.reset();
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(sample_config().validate());
}

TEST(EndToEnd, OracleDetectionOnSample) {
  const auto config = oracle_config();
  const auto corpus = load_corpus(config);
  const auto preds = run_end_to_end(config, corpus);
  ASSERT_EQ(preds.size(), 8u);  // user turns 1, 3, ..., 15
  std::set<int> detected;
  for (const auto& r : preds) {
    EXPECT_NO_THROW(check_gating(r));
    if (!r.detected) continue;
    detected.insert(r.turn.turn);
    ASSERT_EQ(r.selected.size(), 1u);
    ASSERT_TRUE(r.response.has_value());
    EXPECT_NE(corpus.kb.at(r.selected[0]).body.find(*r.response), std::string::npos);
    ASSERT_TRUE(r.ranking.has_value());
    EXPECT_EQ(r.ranking->front().key, r.selected[0]);
  }
  EXPECT_EQ(detected, (std::set<int>{3, 7, 11, 15}));
}

TEST(EndToEnd, DeterministicOutput) {
  auto config = sample_config();
  config.lof_k = 3;
  const auto corpus = load_corpus(config);
  const auto a = predictions_to_jsonl(run_end_to_end(config, corpus));
  const auto b = predictions_to_jsonl(run_end_to_end(config, corpus));
  EXPECT_EQ(a, b);
  config.seed = 123;
  EXPECT_EQ(a.size(), predictions_to_jsonl(run_end_to_end(config, corpus)).size());
}

TEST(EndToEnd, NoTargetsPassesThrough) {
  auto config = oracle_config();
  auto corpus = load_corpus(config);
  for (auto& d : corpus.dialogues) {
    for (auto& l : *d.labels) {
      l.target = false;
      l.knowledge.clear();
      l.response.reset();
    }
  }
  const auto preds = run_end_to_end(config, corpus);
  ASSERT_FALSE(preds.empty());
  for (const auto& r : preds) {
    EXPECT_FALSE(r.detected);
    EXPECT_TRUE(r.selected.empty());
    EXPECT_FALSE(r.response.has_value());
  }
  const auto reports = evaluate(preds, corpus.dialogues);
  ASSERT_TRUE(reports.detection.has_value());
  EXPECT_EQ(reports.detection->accuracy, 1.0);
  EXPECT_FALSE(reports.selection.has_value());
  EXPECT_FALSE(reports.generation.has_value());
}

TEST(EndToEnd, AllOracleIsPerfect) {
  auto config = oracle_config();
  config.selection = SelectionMethod::Oracle;
  config.generation = GenerationMethod::Oracle;
  const auto corpus = load_corpus(config);
  const auto r = evaluate(run_end_to_end(config, corpus), corpus.dialogues);
  EXPECT_EQ(r.detection->f1, 1.0);
  EXPECT_EQ(r.detection->accuracy, 1.0);
  EXPECT_EQ(r.selection->mrr_at_5, 1.0);
  EXPECT_EQ(r.selection->r_at_1, 1.0);
  EXPECT_EQ(r.generation->unigram_f1, 1.0);
  EXPECT_EQ(r.generation->bleu4, 1.0);
  EXPECT_EQ(r.generation->rouge_l, 1.0);
}

TEST(EndToEnd, ExternalStagesReadFiles) {
  const auto dir = scratch_dir("external");
  write_file(dir / "det.jsonl",
             "{\"dialogue_id\":\"s1\",\"turn\":1,\"score\":0.1}\n"
             "{\"dialogue_id\":\"s1\",\"turn\":3,\"score\":0.9}\n"
             "{\"dialogue_id\":\"s1\",\"turn\":5,\"score\":0.2}\n"
             "{\"dialogue_id\":\"s1\",\"turn\":7,\"score\":0.2}\n"
             "{\"dialogue_id\":\"s1\",\"turn\":9,\"score\":0.2}\n"
             "{\"dialogue_id\":\"s1\",\"turn\":11,\"score\":0.2}\n"
             "{\"dialogue_id\":\"s1\",\"turn\":13,\"score\":0.2}\n"
             "{\"dialogue_id\":\"s1\",\"turn\":15,\"score\":0.2}\n");
  write_file(dir / "resp.jsonl",
             "{\"dialogue_id\":\"s1\",\"turn\":3,\"text\":\"sure thing .\"}\n");
  auto config = sample_config();
  config.detection = DetectionMethod::External;
  config.generation = GenerationMethod::External;
  config.paths.detection_scores = dir / "det.jsonl";
  config.paths.responses = dir / "resp.jsonl";
  const auto preds = run_end_to_end(config, load_corpus(config));
  for (const auto& r : preds) {
    EXPECT_EQ(r.detected, r.turn.turn == 3);
    if (r.detected) {
      EXPECT_EQ(*r.response, "sure thing .");
    }
  }
}

TEST(Gating, RejectsInconsistentRecords) {
  PredictionRecord r{{"d", 1}, false, 0.1, {}, std::nullopt, std::nullopt, std::nullopt};
  EXPECT_NO_THROW(check_gating(r));
  r.response = "x";
  EXPECT_THROW(check_gating(r), ValidationError);
  r.detected = true;
  EXPECT_THROW(check_gating(r), ValidationError);  // nothing selected
  r.selected = {{"hotel", "1", "2"}};
  EXPECT_NO_THROW(check_gating(r));
  r.response.reset();
  EXPECT_THROW(check_gating(r), ValidationError);
}

TEST(Predictions, RoundTripAndSorted) {
  PredictionFile preds{
      {{"b", 3}, true, 0.7, {{"hotel", "1", "2"}}, "yes .",
       std::vector<selection::ScoredCandidate>{{{"hotel", "1", "2"}, 0.5},
                                               {{"hotel", std::nullopt, "1"}, 0.25}},
       "low_score"},
      {{"a", 1}, false, std::nullopt, {}, std::nullopt, std::nullopt, std::nullopt}};
  const auto text = predictions_to_jsonl(preds);
  const auto back = parse_predictions(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], preds[1]);
  EXPECT_EQ(back[1], preds[0]);
  EXPECT_EQ(predictions_to_jsonl(back), text);
  EXPECT_THROW(parse_predictions("{\"dialogue_id\":\"a\",\"turn\":1,\"detected\":false,"
                                 "\"response\":\"x\"}\n"),
               ValidationError);
  EXPECT_THROW(parse_predictions("{\"dialogue_id\":\"a\",\"turn\":1}\n"), ParseError);
  EXPECT_THROW(parse_predictions("{\"dialogue_id\":\"a\",\"turn\":1,\"detected\":false}\n"
                                 "{\"dialogue_id\":\"a\",\"turn\":1,\"detected\":false}\n"),
               ValidationError);
}

TEST(Evaluate, RequiresEveryUserTurn) {
  const auto config = oracle_config();
  const auto corpus = load_corpus(config);
  auto preds = run_end_to_end(config, corpus);
  preds.pop_back();
  EXPECT_THROW(evaluate(preds, corpus.dialogues), DataError);
  EXPECT_THROW(evaluate({}, corpus.dialogues), DataError);
}

TEST(Evaluate, OnlyRequestedReports) {
  const auto config = oracle_config();
  const auto corpus = load_corpus(config);
  const auto preds = run_end_to_end(config, corpus);
  const auto r = evaluate(preds, corpus.dialogues, EvaluationSet{true, false, false});
  EXPECT_TRUE(r.detection.has_value());
  EXPECT_FALSE(r.selection.has_value());
  EXPECT_FALSE(r.generation.has_value());
}

TEST(Fixture, ShapeAndDeterminism) {
  const auto a = make_fixture(7);
  const auto b = make_fixture(7);
  EXPECT_EQ(a.knowledge, b.knowledge);
  EXPECT_EQ(a.logs, b.logs);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_NE(make_fixture(8).logs, a.logs);

  const auto kb = parse_knowledge_base(a.knowledge);
  const auto dialogues = parse_dialogues(a.logs, a.labels, &kb);
  const auto stats = corpus_stats(kb, dialogues);
  EXPECT_EQ(stats.n_entity_snippets, 24u);
  EXPECT_EQ(stats.n_domain_snippets, 4u);
  EXPECT_EQ(stats.n_entities, 6u);
  EXPECT_EQ(stats.n_dialogues, 10u);
  EXPECT_EQ(stats.n_augmented_turns, 20u);

  FixtureSizes bad;
  bad.dialogues = 0;
  EXPECT_THROW(make_fixture(1, bad), ConfigError);
}

TEST(Fixture, TfidfRetrievesEveryGold) {
  const auto dir = scratch_dir("fixture");
  write_fixture(make_fixture(7), dir);
  PipelineConfig config;
  config.detection = DetectionMethod::Oracle;
  config.paths.knowledge = dir / "knowledge.json";
  config.paths.logs = dir / "logs.json";
  config.paths.labels = dir / "labels.json";
  for (auto method : {SelectionMethod::Tfidf, SelectionMethod::Bm25}) {
    config.selection = method;
    const auto corpus = load_corpus(config);
    const auto r = evaluate(run_end_to_end(config, corpus), corpus.dialogues);
    EXPECT_EQ(r.selection->r_at_1, 1.0) << to_string(method);
    EXPECT_EQ(r.selection->n_turns, 20u);
  }
}

TEST(Scope, FirstGoldReferenceElseGlobal) {
  const auto corpus = load_corpus(sample_config());
  const auto& d = corpus.dialogues.front();
  const auto s7 = scope_for_turn(d, 7);
  EXPECT_EQ(s7.domain, "hotel");
  EXPECT_EQ(s7.entity_id, std::optional<std::string>("1"));
  const auto s3 = scope_for_turn(d, 3);
  EXPECT_EQ(s3.domain, "train");
  EXPECT_FALSE(s3.entity_id.has_value());
  EXPECT_EQ(scope_for_turn(d, 1).kind, selection::CandidateScope::Kind::Global);
}
