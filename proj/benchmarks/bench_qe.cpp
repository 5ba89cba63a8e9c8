#include <benchmark/benchmark.h>

#include "capqe/mock_providers.hpp"
#include "capqe/qe.hpp"

namespace {

void BM_BtSemanticFscore(benchmark::State& state) {
  capqe::MockTextEmbedder emb(static_cast<int>(state.range(0)), 0);
  const std::vector<std::string> texts = {"A man rides a red bicycle down a busy city street.",
                                          "A man is riding a bike along the crowded road."};
  const auto seqs = emb.embed_text_tokens(texts);
  for (auto _ : state) benchmark::DoNotOptimize(capqe::bt_semantic_fscore(seqs[0], seqs[1]));
}
BENCHMARK(BM_BtSemanticFscore)->Arg(64)->Arg(768);

void BM_AssembleScores(benchmark::State& state) {
  const capqe::QEConfig cfg;
  double x = 0.0;
  for (auto _ : state) {
    x += 1e-9;
    benchmark::DoNotOptimize(capqe::assemble_scores(0.76, 0.97, 0.31, 0.29 + x, cfg));
  }
}
BENCHMARK(BM_AssembleScores);

}  // namespace
