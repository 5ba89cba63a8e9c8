#include <benchmark/benchmark.h>

#include <random>

#include "capqe/metrics.hpp"

namespace {

std::vector<capqe::SegmentPair> corpus(int n) {
  static const std::vector<std::string> vocab = {"ایک", "کتا", "گھاس", "پر", "دوڑ", "رہا", "ہے",
                                                 "۔", "بچے", "پارک", "میں", "کھیل"};
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> w(0, int(vocab.size()) - 1), len(6, 14);
  std::vector<capqe::SegmentPair> out(n);
  for (auto& p : out) {
    for (auto* side : {&p.hypothesis, &p.reference}) {
      for (int k = len(rng); k > 0; --k) *side += vocab[w(rng)] + " ";
    }
  }
  return out;
}

void BM_CorpusBleu(benchmark::State& state) {
  const auto pairs = corpus(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(capqe::corpus_bleu(pairs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CorpusBleu)->Arg(100)->Arg(10000);

void BM_Chrf(benchmark::State& state) {
  const auto pairs = corpus(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(capqe::chrf(pairs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Chrf)->Arg(100)->Arg(10000);

}  // namespace
