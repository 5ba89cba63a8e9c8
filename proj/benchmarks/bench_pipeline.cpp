#include <benchmark/benchmark.h>

#include "capqe/corpus.hpp"
#include "capqe/pipeline.hpp"

namespace {

capqe::Corpus caption_corpus(int n) {
  std::vector<capqe::ImageEntry> images;
  std::vector<capqe::CaptionRecord> captions;
  for (int i = 1; i <= n; ++i) {
    images.push_back({i, "a dog on the grass number " + std::to_string(i % 17), {}, {i}});
    captions.push_back({i, i, "A dog runs on the grass near tree " + std::to_string(i % 23) + ".",
                        {}, {}, {}, capqe::CaptionStatus::Pending, 0});
  }
  return capqe::Corpus(std::move(images), std::move(captions));
}

void BM_RunPipelineMemory(benchmark::State& state) {
  const auto corpus = caption_corpus(2000);
  const auto providers = capqe::make_providers({});
  capqe::RunOptions opts;
  opts.chunk_size = 250;
  opts.workers = static_cast<int>(state.range(0));
  opts.config_hash = "bench";
  for (auto _ : state) {
    capqe::MemoryStore store;
    benchmark::DoNotOptimize(capqe::run_pipeline(corpus, providers, capqe::QEConfig{}, store, opts));
  }
  state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(BM_RunPipelineMemory)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace
