#include <benchmark/benchmark.h>

#include "perspectra/experiment.hpp"
#include "perspectra/graph.hpp"
#include "perspectra/model.hpp"
#include "perspectra/numkit/kernels.hpp"

namespace {

using namespace perspectra;

Matrix<float> random_matrix(Rng& rng, std::size_t r, std::size_t c) {
  Matrix<float> m(r, c);
  for (auto& v : m.flat()) v = static_cast<float>(rng.uniform(-1, 1));
  return m;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const auto a = random_matrix(rng, n, 256), b = random_matrix(rng, 256, 100);
  Matrix<float> out(n, 100);
  for (auto _ : state) {
    matmul_into(a, b, out, false);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * 256 * 100));
}
BENCHMARK(BM_Matmul)->Arg(512)->Arg(4096);

void BM_SoftmaxCe(benchmark::State& state) {
  Rng rng(2);
  const auto logits = random_matrix(rng, 4096, 11);
  std::vector<int> labels(4096);
  for (auto& l : labels) l = static_cast<int>(rng.below(11));
  const std::vector<std::uint8_t> mask(4096, 1);
  for (auto _ : state) benchmark::DoNotOptimize(softmax_ce(logits, labels, mask).loss);
}
BENCHMARK(BM_SoftmaxCe);

// The standard 150-author benchmark corpus, its graph and inputs.
struct Fixture {
  Corpus corpus = generate(GenConfig{}, Lexicon::defaults());
  HeteroGraph graph = build_graph(corpus);
  ModelConfig cfg;
  NodeFeatures features = build_node_features(corpus, graph, HashFeaturizer(cfg.d_in), 1000);
  ModelInputs<float> inputs = prepare_inputs<float>(graph, features.values);
  ModelParams<float> params = ModelParams<float>::glorot(cfg, 1000);
  Targets targets = LabelSet::from_gold_authors(corpus, run_split(corpus, ExperimentConfig{}).train_authors)
                        .targets(graph.mention_tweet());
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_BuildGraph(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(build_graph(f.corpus).num_nodes());
}
BENCHMARK(BM_BuildGraph)->Unit(benchmark::kMillisecond);

void BM_Forward(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(predict(f.params, f.inputs).tweet_stance.data());
  state.counters["nodes"] = static_cast<double>(f.graph.num_nodes());
}
BENCHMARK(BM_Forward)->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  const auto& f = fixture();
  ModelParams<float> grads;
  for (auto _ : state) benchmark::DoNotOptimize(compute_loss(f.params, f.inputs, f.targets, &grads).total());
}
BENCHMARK(BM_ForwardBackward)->Unit(benchmark::kMillisecond);

void BM_TrainEpoch(benchmark::State& state) {
  const auto& f = fixture();
  auto params = f.params;
  AdamWState<float> opt;
  for (auto _ : state) benchmark::DoNotOptimize(train_step(params, opt, f.inputs, f.targets).total());
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
