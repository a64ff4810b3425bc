#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "clarity/metrics.hpp"

namespace {

std::vector<std::string> make_corpus(std::size_t sentences, std::uint64_t seed) {
  static const std::vector<std::string> pool = {
      "norm", "people", "should", "return", "what", "they",   "borrow", "it",
      "is",   "kind",   "to",     "help",   "a",    "friend", "never",  "lie"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> len(4, 14);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::vector<std::string> out;
  out.reserve(sentences);
  for (std::size_t i = 0; i < sentences; ++i) {
    std::string s;
    std::size_t n = len(rng);
    for (std::size_t k = 0; k < n; ++k) {
      if (!s.empty()) s += ' ';
      s += pool[pick(rng)];
    }
    out.push_back(std::move(s));
  }
  return out;
}

void bm_tokenize_13a(benchmark::State& state) {
  std::vector<std::string> corpus = make_corpus(64, 1);
  for (auto _ : state)
    for (const std::string& s : corpus)
      benchmark::DoNotOptimize(clarity::tokenize_13a(s));
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(corpus.size()));
}
BENCHMARK(bm_tokenize_13a);

void bm_corpus_bleu(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<std::string> refs = make_corpus(n, 2);
  std::vector<std::string> hyps = make_corpus(n, 3);
  for (auto _ : state) benchmark::DoNotOptimize(clarity::corpus_bleu(hyps, refs));
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(n));
}
BENCHMARK(bm_corpus_bleu)->Arg(16)->Arg(128)->Arg(1024);

void bm_rouge_l(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<std::string> refs = make_corpus(n, 4);
  std::vector<std::string> hyps = make_corpus(n, 5);
  for (auto _ : state) benchmark::DoNotOptimize(clarity::rouge_l(hyps, refs));
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(n));
}
BENCHMARK(bm_rouge_l)->Arg(16)->Arg(128)->Arg(1024);

void bm_embedding_similarity(benchmark::State& state) {
  std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<std::string> refs = make_corpus(n, 6);
  std::vector<std::string> hyps = make_corpus(n, 7);
  clarity::HashProjectionEmbedder embedder;
  for (auto _ : state)
    benchmark::DoNotOptimize(clarity::embedding_similarity(embedder, hyps, refs));
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(n));
}
BENCHMARK(bm_embedding_similarity)->Arg(16)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
