#include "grlp/embedder.hpp"
#include "grlp/env.hpp"
#include "grlp/hgt.hpp"
#include "grlp/kgraph.hpp"
#include "grlp/metrics.hpp"
#include "grlp/policy.hpp"
#include "grlp/reward.hpp"
#include "grlp/synthetic.hpp"
#include "grlp/trainer.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace grlp;

Matrix random_matrix(std::uint64_t seed, Eigen::Index rows, Eigen::Index cols) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
  return m;
}

// Args: pool size N, width d.
void BM_HgtEncode(benchmark::State& state) {
  const auto n = state.range(0);
  const auto d = state.range(1);
  const auto params = init_hgt_params(1, {static_cast<std::size_t>(d), 2, 2, 1});
  const PromptGraph graph(random_matrix(2, n + 1, d));
  for (auto _ : state) benchmark::DoNotOptimize(encode(graph, params));
  state.SetItemsProcessed(state.iterations() * (n * n + n));
}
BENCHMARK(BM_HgtEncode)->Args({6, 32})->Args({20, 64})->Args({50, 64});

void BM_HgtBackward(benchmark::State& state) {
  const auto n = state.range(0);
  const auto d = state.range(1);
  const auto params = init_hgt_params(1, {static_cast<std::size_t>(d), 2, 2, 1});
  const PromptGraph graph(random_matrix(2, n + 1, d));
  const auto enc = encode_traced(graph, params);
  const Matrix grad = Matrix::Ones(enc.output.rows(), enc.output.cols());
  for (auto _ : state) benchmark::DoNotOptimize(backward(graph, params, enc.tape, grad));
}
BENCHMARK(BM_HgtBackward)->Args({6, 32})->Args({20, 64});

void BM_SampleAction(benchmark::State& state) {
  const auto n = state.range(0);
  const Matrix x = random_matrix(3, n + 1, 64);
  const auto params = init_policy_params(4, 64);
  Rng rng(5);
  for (auto _ : state) benchmark::DoNotOptimize(sample_action(x, params, 4, rng));
}
BENCHMARK(BM_SampleAction)->Arg(6)->Arg(20)->Arg(50);

void BM_HashEmbed(benchmark::State& state) {
  const HashEmbedder embedder(64);
  const std::string text = "Mix flour water salt and starter then knead dough and let it rise overnight";
  for (auto _ : state) benchmark::DoNotOptimize(embedder.embed_text(text));
}
BENCHMARK(BM_HashEmbed);

void BM_ScoreItem(benchmark::State& state) {
  const std::string ref = "walk nodes keeping previous current next pointers flipping each link backwards";
  const std::string cand = "walk the nodes and flip each link while keeping previous and next pointers";
  for (auto _ : state) benchmark::DoNotOptimize(score_item(ref, cand));
}
BENCHMARK(BM_ScoreItem);

void BM_Reward(benchmark::State& state) {
  const RewardConfig cfg{0.4, std::make_shared<HashEmbedder>(64)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(reward("Jupiter is the biggest planet orbiting our sun",
                                    "Jupiter is the largest planet in the solar system", cfg));
  }
}
BENCHMARK(BM_Reward);

// One update of the synthetic task against the mock environment; arg is the variant.
void BM_TrainStep(benchmark::State& state) {
  TrainConfig cfg;
  cfg.hgt = {32, 2, 2, 1};
  cfg.optimizer = OptimizerKind::adam;
  cfg.learning_rate = 1e-3;
  cfg.max_steps = 1u << 30;
  cfg.variant = static_cast<Variant>(state.range(0));
  auto embedder = std::make_shared<HashEmbedder>(32);
  auto env = std::make_shared<MockEnvironment>(default_template(), embedder);
  Trainer trainer(cfg, make_synthetic_task({}), embedder, env);
  for (auto _ : state) benchmark::DoNotOptimize(trainer.step());
  state.SetLabel(std::string(to_string(cfg.variant)));
}
BENCHMARK(BM_TrainStep)->Arg(static_cast<int>(Variant::full))->Arg(static_cast<int>(Variant::no_kg))
    ->Arg(static_cast<int>(Variant::knn_select));

}  // namespace
BENCHMARK_MAIN();
