#include <benchmark/benchmark.h>

#include <random>

#include "capqe/corpus.hpp"
#include "capqe/sampler.hpp"

namespace {

capqe::Corpus labelled_corpus(int n) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> count(0, 4), label(0, 79);
  std::vector<capqe::ImageEntry> images;
  std::vector<capqe::CaptionRecord> captions;
  for (int i = 1; i <= n; ++i) {
    capqe::ImageEntry img{i, "img/" + std::to_string(i), {}, {i}};
    for (int k = count(rng); k > 0; --k) img.labels.labels.insert("c" + std::to_string(label(rng)));
    images.push_back(img);
    captions.push_back({i, i, "caption", {}, {}, {}, capqe::CaptionStatus::Pending, 0});
  }
  return capqe::Corpus(std::move(images), std::move(captions));
}

void BM_StratifiedSample(benchmark::State& state) {
  const auto corpus = labelled_corpus(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(capqe::stratified_sample(corpus, 0.1, 0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StratifiedSample)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

}  // namespace
