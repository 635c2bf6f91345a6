#include <benchmark/benchmark.h>

#include <vector>

#include "hlnet/freq_bias.hpp"
#include "hlnet/generator.hpp"
#include "hlnet/metrics.hpp"
#include "hlnet/model.hpp"
#include "hlnet/sampling.hpp"
#include "hlnet/trainer.hpp"

namespace {

using namespace hlnet;

GenConfig bench_corpus_config(int train_scenes, int test_scenes) {
  GenConfig gen;
  gen.train_scenes = train_scenes;
  gen.val_scenes = 0;
  gen.test_scenes = test_scenes;
  gen.seed = 3;
  return gen;
}

ModelConfig bench_model_config(const GenConfig& gen, int width) {
  ModelConfig mc;
  mc.num_object_classes = gen.num_object_classes;
  mc.num_predicates = gen.num_predicates;
  mc.appearance_dim = gen.appearance_dim;
  mc.width = width;
  mc.ffn_hidden = 2 * width;
  return mc;
}

void BM_GenerateCorpus(benchmark::State& state) {
  const GenConfig gen = bench_corpus_config(static_cast<int>(state.range(0)), 0);
  for (auto _ : state) benchmark::DoNotOptimize(generate_corpus(gen));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateCorpus)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

// Forward pass plus loss on one scene, with and without the backward pass.
void forward_backward(benchmark::State& state, bool backward) {
  const GenConfig gen = bench_corpus_config(20, 0);
  const Corpus corpus = generate_corpus(gen);
  const Model model(bench_model_config(gen, static_cast<int>(state.range(0))),
                    build_frequency_bias(corpus.train, gen.num_object_classes, gen.num_predicates), 1);
  std::vector<SceneInputs> inputs;
  for (const auto& g : corpus.train) inputs.push_back(prepare_scene(g));
  std::size_t s = 0;
  for (auto _ : state) {
    const auto& in = inputs[s++ % inputs.size()];
    const auto loss = total_loss(model, in, forward(model, in, all_pairs(*in.scene), BiasClasses::GroundTruth));
    if (backward) loss.total.backward();
    benchmark::DoNotOptimize(loss.total.item());
  }
}

void BM_Forward(benchmark::State& state) { forward_backward(state, false); }
void BM_ForwardBackward(benchmark::State& state) { forward_backward(state, true); }
BENCHMARK(BM_Forward)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardBackward)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_TrainEpoch(benchmark::State& state) {
  const GenConfig gen = bench_corpus_config(50, 0);
  const Corpus corpus = generate_corpus(gen);
  TrainConfig cfg;
  cfg.model = bench_model_config(gen, 32);
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train(corpus, cfg).log.back().train_loss);
  state.SetItemsProcessed(state.iterations() * gen.train_scenes);
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

void BM_ComputeMetrics(benchmark::State& state) {
  const GenConfig gen = bench_corpus_config(20, static_cast<int>(state.range(0)));
  const Corpus corpus = generate_corpus(gen);
  const Model model(bench_model_config(gen, 16), build_frequency_bias(corpus.train, gen.num_object_classes, gen.num_predicates),
                    1);
  const auto preds = predict_all(model, corpus.test, Task::SgCls);
  for (auto _ : state) benchmark::DoNotOptimize(compute_metrics(Task::SgCls, preds, corpus.test));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ComputeMetrics)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
