#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "ukad/detection.hpp"
#include "ukad/metrics.hpp"
#include "ukad/pipeline.hpp"
#include "ukad/selection.hpp"

namespace {

std::vector<ukad::detection::DenseVector> cloud(std::size_t n, std::size_t dim) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<ukad::detection::DenseVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    for (auto& x : v) x = g(rng);
    out.emplace_back(std::move(v));
  }
  return out;
}

void BM_LofFit(benchmark::State& state) {
  const auto pts = cloud(static_cast<std::size_t>(state.range(0)), 32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ukad::detection::LofModel::fit(pts, 20));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LofFit)->RangeMultiplier(2)->Range(256, 2048)->Complexity();

void BM_LofQuery(benchmark::State& state) {
  const auto model = ukad::detection::LofModel::fit(cloud(2048, 32), 20);
  const auto q = cloud(1, 32).front();
  for (auto _ : state) benchmark::DoNotOptimize(model.score(q));
}
BENCHMARK(BM_LofQuery);

void BM_Bm25Scope(benchmark::State& state) {
  ukad::pipeline::FixtureSizes sizes;
  sizes.domains = 5;
  sizes.entities_per_domain = 40;
  sizes.docs_per_entity = 8;
  sizes.domain_docs = 20;
  const auto kb = ukad::parse_knowledge_base(ukad::pipeline::make_fixture(3, sizes).knowledge);
  const auto docs = ukad::selection::build_candidates(kb, ukad::selection::CandidateScope::global());
  const auto index = ukad::selection::TermIndex::build(docs);
  const auto query = ukad::text::tokenize(
      "hello , i am looking for a place to stay . does it have free parking and wifi ?");
  for (auto _ : state) {
    benchmark::DoNotOptimize(ukad::selection::score_bm25(index, query));
  }
  state.counters["candidates"] = static_cast<double>(docs.size());
}
BENCHMARK(BM_Bm25Scope);

void BM_Meteor(benchmark::State& state) {
  const std::string hyp =
      "yes , the gonville hotel allows dogs but you need to ask the staff first .";
  const std::string ref =
      "the gonville hotel does allow dogs , please ask the staff before you arrive .";
  for (auto _ : state) benchmark::DoNotOptimize(ukad::metrics::meteor(hyp, ref));
}
BENCHMARK(BM_Meteor);

}  // namespace

BENCHMARK_MAIN();
