#include "stancelab/freqfeat.hpp"
#include "stancelab/heads.hpp"
#include "stancelab/netgraph.hpp"
#include "stancelab/random.hpp"
#include "stancelab/skipgram.hpp"
#include "stancelab/walks.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <string>
#include <vector>

using namespace stancelab;

namespace {

InteractionGraph random_graph(std::size_t n, std::size_t out_degree, std::uint64_t seed) {
  Rng rng(seed);
  std::map<std::pair<std::string, std::string>, std::uint8_t> masks;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t k = 0; k < out_degree; ++k) {
      const std::size_t v = uniform_index(rng, n);
      if (v == u) continue;
      masks[{"u" + std::to_string(u), "u" + std::to_string(v)}] =
          static_cast<std::uint8_t>(1 + uniform_index(rng, 15));
    }
  }
  return InteractionGraph::from_masks(masks);
}

std::vector<std::vector<std::string>> random_docs(std::size_t n, std::size_t vocab, std::size_t len) {
  Rng rng(11);
  std::vector<std::vector<std::string>> docs(n);
  for (auto& d : docs) {
    for (std::size_t i = 0; i < len; ++i) d.push_back("w" + std::to_string(uniform_index(rng, vocab)));
  }
  return docs;
}

void BM_Walks(benchmark::State& state) {
  const auto g = random_graph(static_cast<std::size_t>(state.range(0)), 5, 1);
  WalkConfig cfg;
  cfg.strategy = state.range(1) == 0 ? WalkStrategy::DeepWalk : WalkStrategy::Node2Vec;
  cfg.walks_per_node = 2;
  cfg.walk_length = 40;
  cfg.p = 0.5;
  cfg.q = 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(generate_walks(g, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0) * 2 * 40);
}
BENCHMARK(BM_Walks)->Args({1000, 0})->Args({1000, 1})->Args({10000, 0})->Unit(benchmark::kMillisecond);

void BM_SkipGram(benchmark::State& state) {
  const auto g = random_graph(500, 5, 2);
  WalkConfig wc;
  wc.walks_per_node = 2;
  wc.walk_length = 20;
  const auto walks = generate_walks(g, wc);
  SkipGramConfig sc;
  sc.dim = static_cast<std::size_t>(state.range(0));
  sc.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train_skipgram(walks, sc));
}
BENCHMARK(BM_SkipGram)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Tfidf(benchmark::State& state) {
  const auto docs = random_docs(static_cast<std::size_t>(state.range(0)), 5000, 20);
  for (auto _ : state) {
    const auto model = fit_tfidf(docs, Vocabulary::build(docs));
    benchmark::DoNotOptimize(tfidf_features(docs, model));
  }
}
BENCHMARK(BM_Tfidf)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_HeadForward(benchmark::State& state) {
  HeadConfig cfg;
  cfg.kind = static_cast<HeadKind>(state.range(0));
  const std::size_t L = 64, d = 300;
  auto head = make_head(cfg, L, d);
  Rng rng(3);
  SequenceMatrix x{Matrix(L, d), std::vector<bool>(L, true)};
  for (Eigen::Index i = 0; i < x.rows.size(); ++i) x.rows.data()[i] = standard_normal(rng);
  for (auto _ : state) benchmark::DoNotOptimize(head->forward(x, nullptr));
}
BENCHMARK(BM_HeadForward)->DenseRange(0, 3)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
