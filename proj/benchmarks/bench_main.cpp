#include <benchmark/benchmark.h>

#include "mgtd/augment.hpp"
#include "mgtd/model.hpp"
#include "mgtd/objective.hpp"
#include "mgtd/paraphrase.hpp"
#include "mgtd/segment.hpp"
#include "mgtd/trainer.hpp"
#include "synthetic.hpp"

using namespace mgtd;

namespace {

std::vector<Document> bench_docs(std::size_t n) {
  return testsupport::make_synthetic_corpus(n, 1234);
}

void BM_SegmentRejoin(benchmark::State& state) {
  const auto docs = bench_docs(64);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& text = docs[i++ % docs.size()].text;
    benchmark::DoNotOptimize(rejoin(segment(text)));
  }
}
BENCHMARK(BM_SegmentRejoin);

void BM_Tokenize(benchmark::State& state) {
  const auto docs = bench_docs(64);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& text = docs[i++ % docs.size()].text;
    benchmark::DoNotOptimize(tokenize(text, 4096, 32768));
  }
}
BENCHMARK(BM_Tokenize);

void BM_NoiseParaphrase(benchmark::State& state) {
  const auto docs = bench_docs(64);
  NoiseParaphraser noise(7);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& doc = docs[i++ % docs.size()];
    benchmark::DoNotOptimize(paraphrase_document(doc, noise));
  }
}
BENCHMARK(BM_NoiseParaphrase);

void BM_ForwardPair(benchmark::State& state) {
  const auto docs = bench_docs(64);
  NoiseParaphraser noise(7);
  const auto instances = augment_corpus(docs, noise);

  ModelConfig cfg;
  cfg.encoder.dim = static_cast<int>(state.range(0));
  cfg.head.hidden_dim = static_cast<int>(state.range(0));
  cfg.encoder.vocab_buckets = 4096;
  DetectorModel model(cfg);
  model.init_params(3);

  std::size_t i = 0;
  for (auto _ : state) {
    const auto& inst = instances[i++ % instances.size()];
    benchmark::DoNotOptimize(model.forward_pair(inst, RunMode::eval));
  }
}
BENCHMARK(BM_ForwardPair)->Arg(16)->Arg(64)->Arg(128);

void BM_PairLossWithGrads(benchmark::State& state) {
  const auto docs = bench_docs(64);
  NoiseParaphraser noise(7);
  const auto instances = augment_corpus(docs, noise);

  ModelConfig cfg;
  cfg.encoder.dim = 64;
  cfg.head.hidden_dim = 64;
  cfg.encoder.vocab_buckets = 4096;
  cfg.head.dropout_p = 0.0;
  DetectorModel model(cfg);
  model.init_params(3);
  ParamSet grads = model.params().zeros_like();

  std::size_t i = 0;
  for (auto _ : state) {
    const auto& inst = instances[i++ % instances.size()];
    PairTrace trace;
    const PairOutput out = model.forward_pair(inst, RunMode::eval, nullptr, &trace);
    PairGrads pair_grads;
    total_loss_with_grads(out, inst, LossWeights{}, ContrastiveMode{}, false,
                          pair_grads);
    model.backward_pair(trace, pair_grads, grads);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_PairLossWithGrads);

void BM_TrainEpoch(benchmark::State& state) {
  const auto docs = bench_docs(static_cast<std::size_t>(state.range(0)));
  NoiseParaphraser noise(7);
  const auto instances = augment_corpus(docs, noise);

  TrainConfig cfg;
  cfg.model.encoder.dim = 64;
  cfg.model.head.hidden_dim = 64;
  cfg.model.encoder.vocab_buckets = 4096;
  cfg.max_tokens = 512;
  cfg.seed = 3;

  for (auto _ : state) {
    DetectorModel model(cfg.resolved_model());
    model.init_params(1);
    AdamW opt({cfg.learning_rate, cfg.weight_decay}, model.params());
    benchmark::DoNotOptimize(
        train_epoch(model, opt, instances, cfg, 1, nullptr, nullptr));
  }
}
BENCHMARK(BM_TrainEpoch)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_ComputeMetrics(benchmark::State& state) {
  Rng rng(5);
  std::vector<int> gold(10000), pred(10000);
  for (auto& g : gold) g = rng.bernoulli(0.5) ? 1 : 0;
  for (auto& p : pred) p = rng.bernoulli(0.5) ? 1 : 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_metrics(gold, pred));
  }
}
BENCHMARK(BM_ComputeMetrics);

}  // namespace

BENCHMARK_MAIN();
