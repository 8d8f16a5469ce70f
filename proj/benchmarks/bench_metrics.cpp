// Microbenchmarks for the scoring hot paths: sentence BLEU, greedy token
// matching, transformer forward passes and the summary statistics.

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "stsscore/backend/model.hpp"
#include "stsscore/metrics/bleu.hpp"
#include "stsscore/metrics/embed.hpp"
#include "stsscore/metrics/sts.hpp"
#include "stsscore/stats.hpp"

using namespace stsscore;

namespace {

const std::vector<std::string> kWords = {"the", "a", "man", "woman", "dog", "cat", "is", "was", "playing",
                                         "eating", "guitar", "food", "on", "in", "street", "park", "with",
                                         "red", "small", "running", "two", "children", "ball", "."};

std::string sentence(std::mt19937_64& rng, std::size_t words) {
  std::string s;
  for (std::size_t i = 0; i < words; ++i) s += (i ? " " : "") + kWords[rng() % kWords.size()];
  return s;
}

ModelBundle bundle(const char* name) { return load_bundle(std::string(STSSCORE_BENCH_BUNDLES) + "/" + name); }

TokenEmbeddings random_embeddings(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index dim) {
  std::normal_distribution<double> normal;
  TokenEmbeddings e;
  e.vectors = EmbeddingMatrix(rows, dim);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) e.vectors(r, c) = normal(rng);
  e.token_ids.assign(static_cast<std::size_t>(rows), 7);
  e.mask.assign(static_cast<std::size_t>(rows), 1);
  e.special_token_flags.assign(static_cast<std::size_t>(rows), 0);
  return e;
}

void BM_SentenceBleu(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto words = static_cast<std::size_t>(state.range(0));
  const std::string ref = sentence(rng, words), cand = sentence(rng, words);
  for (auto _ : state) benchmark::DoNotOptimize(sentence_bleu(cand, ref));
}
BENCHMARK(BM_SentenceBleu)->Arg(10)->Arg(40)->Arg(160);

void BM_GreedyMatch(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto tokens = state.range(0);
  const auto ref = random_embeddings(rng, tokens, 768);
  const auto cand = random_embeddings(rng, tokens, 768);
  for (auto _ : state) benchmark::DoNotOptimize(greedy_match(ref, cand));
}
BENCHMARK(BM_GreedyMatch)->Arg(16)->Arg(64)->Arg(128);

void BM_TransformerRegression(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const auto config = StsConfig::from_bundle(bundle("tiny-roberta-sts"));
  std::vector<SentencePair> pairs;
  for (int i = 0; i < state.range(0); ++i) pairs.push_back({std::to_string(i), sentence(rng, 12), sentence(rng, 12)});
  for (auto _ : state) benchmark::DoNotOptimize(sts_score_batch(config, pairs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TransformerRegression)->Arg(1)->Arg(16);

void BM_TransformerEmbed(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const auto encoder = bundle("tiny-minilm");
  std::vector<std::string> texts;
  for (int i = 0; i < state.range(0); ++i) texts.push_back(sentence(rng, 12));
  for (auto _ : state) benchmark::DoNotOptimize(encoder.encode_tokens_batch(texts));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TransformerEmbed)->Arg(1)->Arg(16);

std::vector<double> uniform(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u;
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

void BM_Pearson(benchmark::State& state) {
  std::mt19937_64 rng(5);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = uniform(rng, n), y = uniform(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(pearson(x, y));
}
BENCHMARK(BM_Pearson)->Arg(1500)->Arg(100000);

void BM_Spearman(benchmark::State& state) {
  std::mt19937_64 rng(6);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = uniform(rng, n), y = uniform(rng, n);
  for (auto _ : state) benchmark::DoNotOptimize(spearman(x, y));
}
BENCHMARK(BM_Spearman)->Arg(1500)->Arg(100000);

void BM_RocAuc(benchmark::State& state) {
  std::mt19937_64 rng(7);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto scores = uniform(rng, n);
  std::vector<double> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<double>(i % 2);
  for (auto _ : state) benchmark::DoNotOptimize(roc_auc(scores, labels));
}
BENCHMARK(BM_RocAuc)->Arg(1725)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
