#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "oracles/lof_oracle.hpp"
#include "ukad/detection.hpp"
#include "ukad/errors.hpp"

using namespace ukad;
using namespace ukad::detection;

namespace {

std::vector<oracle::Point> random_points(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<oracle::Point> pts(n, oracle::Point(dim));
  for (auto& p : pts) {
    for (auto& x : p) x = u(rng);
  }
  return pts;
}

std::vector<DenseVector> dense(const std::vector<oracle::Point>& pts) {
  std::vector<DenseVector> out;
  for (const auto& p : pts) out.emplace_back(p);
  return out;
}

}  // namespace

TEST(Lof, MatchesOracleOnUniformPoints) {
  std::mt19937_64 rng(100);
  const auto pts = random_points(rng, 100, 2);
  const auto model = fit_lof(dense(pts), 5);
  const oracle::NaiveLof naive(pts, 5);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_NEAR(model.training_scores()[i], naive.lof[i], 1e-9) << i;
  }
  for (const auto& q : random_points(rng, 20, 2)) {
    EXPECT_NEAR(model.score(DenseVector(q)), naive.query(q), 1e-9);
  }
}

TEST(Lof, MatchesOracleWithTiesOnAGrid) {
  std::vector<oracle::Point> pts;
  for (int x = 0; x < 6; ++x) {
    for (int y = 0; y < 6; ++y) pts.push_back({double(x), double(y)});
  }
  pts.push_back({10.0, 10.0});
  for (int k : {1, 2, 3, 4, 8}) {
    const auto model = fit_lof(dense(pts), k);
    const oracle::NaiveLof naive(pts, k);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      EXPECT_NEAR(model.training_scores()[i], naive.lof[i], 1e-9);
      // Ties enlarge the neighbourhood past k.
      EXPECT_GE(model.neighborhood(i).size(), static_cast<std::size_t>(k));
    }
  }
  const auto model = fit_lof(dense(pts), 1);
  EXPECT_EQ(model.neighborhood(0).size(), 2u);  // corner (0,0): (0,1) and (1,0)
}

TEST(Lof, IdenticalPointsScoreOne) {
  const std::vector<DenseVector> pts(3, DenseVector({1.0, 2.0}));
  const auto model = fit_lof(pts, 1);
  for (double s : model.training_scores()) EXPECT_EQ(s, 1.0);
  EXPECT_EQ(model.score(DenseVector({1.0, 2.0})), 1.0);
}

TEST(Lof, QueryOnDuplicatedPointScoresExactlyOne) {
  std::mt19937_64 rng(5);
  auto pts = random_points(rng, 30, 3);
  const int k = 4;
  for (int i = 0; i < k + 1; ++i) pts.push_back({7.0, 7.0, 7.0});
  const auto model = fit_lof(dense(pts), k);
  EXPECT_EQ(model.score(DenseVector({7.0, 7.0, 7.0})), 1.0);
}

TEST(Lof, Preconditions) {
  const std::vector<DenseVector> three(3, DenseVector({0.0}));
  EXPECT_THROW(fit_lof(three, 3), ValidationError);
  EXPECT_THROW(fit_lof(three, 0), ValidationError);
  EXPECT_THROW(fit_lof({DenseVector({0.0}), DenseVector({0.0, 1.0})}, 1), ValidationError);
  EXPECT_THROW(DenseVector({}), ValidationError);
  EXPECT_THROW(DenseVector({std::nan("")}), ValidationError);
  const auto model = fit_lof({DenseVector({0.0}), DenseVector({1.0})}, 1);
  EXPECT_THROW(model.score(DenseVector({0.0, 0.0})), ValidationError);
}

TEST(Lof, DenseClusterCentreIsInlierAndFarPointIsOutlier) {
  std::mt19937_64 rng(9);
  const auto pts = random_points(rng, 200, 2);
  const auto model = fit_lof(dense(pts), kDefaultNeighbors);
  const oracle::NaiveLof naive(pts, kDefaultNeighbors);
  const oracle::Point centre{0.0, 0.0};
  const double s = model.score(DenseVector(centre));
  EXPECT_NEAR(s, naive.query(centre), 1e-9);
  EXPECT_NEAR(s, 1.0, 0.1);
  const oracle::Point far{100.0, 0.0};
  EXPECT_NEAR(model.score(DenseVector(far)), naive.query(far), 1e-6);
  EXPECT_GT(model.score(DenseVector(far)), model.threshold());
  EXPECT_TRUE(detect_turn(model, DenseVector(far)));
  EXPECT_FALSE(detect_turn(model, DenseVector(centre)));
}

TEST(Lof, ThresholdIsTrainingQuantile) {
  std::mt19937_64 rng(3);
  const auto model = fit_lof(dense(random_points(rng, 50, 2)), 5);
  std::vector<double> s(model.training_scores().begin(), model.training_scores().end());
  EXPECT_EQ(model.threshold(), quantile(s, 0.9));
  const std::size_t above =
      std::count_if(s.begin(), s.end(), [&](double x) { return x > model.threshold(); });
  EXPECT_LE(above, 5u);
}

TEST(Quantile, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.9), 3.7);
  EXPECT_DOUBLE_EQ(quantile({5}, 0.9), 5.0);
  EXPECT_DOUBLE_EQ(quantile({1, 2}, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile({1, 2}, 1.0), 2.0);
  EXPECT_THROW(quantile({}, 0.5), std::invalid_argument);
  EXPECT_THROW(quantile({1}, 1.5), std::invalid_argument);
}

TEST(LofProperties, InvariantUnderPermutationTranslationAndScale) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = random_points(rng, 40, 3);
    const int k = 1 + static_cast<int>(rng() % 10);
    const auto base = fit_lof(dense(pts), k);
    const oracle::Point q{0.3, -0.2, 0.5};
    const double base_q = base.score(DenseVector(q));

    std::vector<std::size_t> perm(pts.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<oracle::Point> shuffled, moved, scaled;
    for (std::size_t i : perm) shuffled.push_back(pts[i]);
    for (const auto& p : pts) {
      moved.push_back({p[0] + 5.0, p[1] - 3.0, p[2] + 1.5});
      scaled.push_back({p[0] * 2.5, p[1] * 2.5, p[2] * 2.5});
    }
    const auto ms = fit_lof(dense(shuffled), k);
    const auto mm = fit_lof(dense(moved), k);
    const auto mc = fit_lof(dense(scaled), k);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      EXPECT_NEAR(ms.training_scores()[i], base.training_scores()[perm[i]], 1e-9);
      EXPECT_NEAR(mm.training_scores()[i], base.training_scores()[i], 1e-9);
      EXPECT_NEAR(mc.training_scores()[i], base.training_scores()[i], 1e-9);
    }
    EXPECT_NEAR(ms.score(DenseVector(q)), base_q, 1e-9);
    EXPECT_NEAR(mm.score(DenseVector({q[0] + 5.0, q[1] - 3.0, q[2] + 1.5})), base_q, 1e-9);
    EXPECT_NEAR(mc.score(DenseVector({q[0] * 2.5, q[1] * 2.5, q[2] * 2.5})), base_q, 1e-9);
  }
}

TEST(LofProperties, DetectionIsMonotoneInScore) {
  std::mt19937_64 rng(22);
  const auto model = fit_lof(dense(random_points(rng, 60, 2)), 5);
  // Moving a query away from the data raises its score along a ray, and
  // once detected it stays detected.
  bool seen = false;
  double prev = 0.0;
  for (double r = 1.0; r < 200.0; r *= 1.3) {
    const double s = model.score(DenseVector({r, r}));
    EXPECT_GE(s + 1e-12, prev);
    prev = s;
    const bool d = s > model.threshold();
    if (seen) {
      EXPECT_TRUE(d);
    }
    seen = seen || d;
  }
  EXPECT_TRUE(seen);
}

TEST(Vectors, ParsesAndValidates) {
  const auto t = parse_vectors(
      "{\"dialogue_id\": \"d\", \"turn\": 1, \"vec\": [1, 2, 3, 4]}\n"
      "\n"
      "{\"dialogue_id\": \"d\", \"turn\": 3, \"vec\": [0, 0, 0, 1.5]}\n");
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.at(TurnKey{"d", 3})[3], 1.5);
  EXPECT_TRUE(parse_vectors("").empty());
  try {
    parse_vectors(
        "{\"dialogue_id\": \"d\", \"turn\": 1, \"vec\": [1, 2, 3, 4]}\n"
        "{\"dialogue_id\": \"d\", \"turn\": 3, \"vec\": [1, 2, 3, 4, 5]}\n",
        "v.jsonl");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.where(), "v.jsonl:2");
  }
  EXPECT_THROW(parse_vectors("{\"dialogue_id\": \"d\", \"turn\": 1, \"vec\": [1]}\n"
                             "{\"dialogue_id\": \"d\", \"turn\": 1, \"vec\": [2]}\n"),
               ParseError);
  EXPECT_THROW(parse_vectors("{\"dialogue_id\": \"d\", \"turn\": 1, \"vec\": []}"), ParseError);
  EXPECT_THROW(parse_vectors("not json"), ParseError);
}

TEST(ExternalScores, ThresholdAndRange) {
  const auto p = parse_external_detection_scores(
      "{\"dialogue_id\": \"d\", \"turn\": 3, \"score\": 0.5}\n"
      "{\"dialogue_id\": \"d\", \"turn\": 1, \"score\": 0.99}\n"
      "{\"dialogue_id\": \"d\", \"turn\": 5, \"score\": 0.49}\n",
      "s");
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p[0].turn.turn, 1);  // sorted by turn
  EXPECT_TRUE(p[0].predicted);
  EXPECT_TRUE(p[1].predicted);   // 0.5 is inclusive
  EXPECT_FALSE(p[2].predicted);
  EXPECT_THROW(parse_external_detection_scores(
                   "{\"dialogue_id\": \"d\", \"turn\": 1, \"score\": 1.2}", "s"),
               ParseError);
  const std::vector<TurnKey> required{{"d", 1}, {"d", 7}};
  EXPECT_THROW(parse_external_detection_scores(
                   "{\"dialogue_id\": \"d\", \"turn\": 1, \"score\": 0.2}", "s",
                   std::span<const TurnKey>(required)),
               DataError);
}

TEST(ExternalScores, WritesPredictions) {
  const std::vector<DetectionPrediction> p{{{"d", 1}, 0.25, false}};
  EXPECT_EQ(predictions_to_jsonl(p),
            "{\"dialogue_id\":\"d\",\"turn\":1,\"score\":0.25,\"detected\":false}\n");
}

TEST(TfidfEncoder, NormalizedAndDeterministic) {
  const std::vector<ukad::text::TokenSequence> docs{
      ukad::text::tokenize("i need a train"), ukad::text::tokenize("i need a hotel"),
      ukad::text::tokenize("do they allow pets ?")};
  const auto enc = TfidfEncoder::fit(docs);
  EXPECT_EQ(enc.dim(), 10u);
  const auto v = enc.encode(docs[2]);
  double norm = 0.0;
  for (double x : v.values()) norm += x * x;
  EXPECT_NEAR(norm, 1.0, 1e-12);
  EXPECT_EQ(enc.encode(docs[0]), TfidfEncoder::fit(docs).encode(docs[0]));
  const auto small = TfidfEncoder::fit(docs, 3);
  EXPECT_EQ(small.dim(), 3u);
  // Unknown words map to the zero vector, which stays finite.
  const auto unknown = enc.encode(ukad::text::tokenize("zebra"));
  for (double x : unknown.values()) EXPECT_EQ(x, 0.0);
}

TEST(ExternalScores, PredictionsRoundTrip) {
  const std::vector<DetectionPrediction> p{{{"d", 3}, 3.5, true}, {{"d", 1}, 0.25, false}};
  const auto back = parse_predictions(predictions_to_jsonl(p), "p");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0], p[1]);
  EXPECT_EQ(back[1], p[0]);
  EXPECT_THROW(parse_predictions("{\"dialogue_id\":\"d\",\"turn\":1,\"score\":0.2}", "p"),
               ParseError);
}
