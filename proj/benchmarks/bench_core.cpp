/**
 * Copyright 2026 The asfl-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "asfl/data.hpp"
#include "asfl/orchestrator.hpp"
#include "asfl/reference_models.hpp"
#include "asfl/split.hpp"

using namespace asfl;

namespace {

Tensor input_batch(const ModelSpec& spec, std::size_t batch) {
  Tensor x(spec.input_shape.with_batch(batch));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& v : x.values()) v = u(rng);
  return x;
}

void BM_ResminiForward(benchmark::State& state) {
  const auto spec = resmini();
  const auto params = build_model(spec, 1);
  const auto batch = static_cast<std::size_t>(state.range(0));
  const auto x = input_batch(spec, batch);
  for (auto _ : state) benchmark::DoNotOptimize(infer(spec, params, x, 0, spec.layer_count()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_ResminiForward)->Arg(1)->Arg(16)->Arg(64);

void BM_ResminiForwardBackward(benchmark::State& state) {
  const auto spec = resmini();
  const auto params = build_model(spec, 1);
  const auto batch = static_cast<std::size_t>(state.range(0));
  const auto x = input_batch(spec, batch);
  const std::vector<int> labels(batch, 3);
  for (auto _ : state) {
    auto fwd = forward(spec, params, x, 0, spec.layer_count());
    const auto loss = softmax_cross_entropy(fwd.output, labels);
    benchmark::DoNotOptimize(backward(spec, params, fwd.cache, loss.grad));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_ResminiForwardBackward)->Arg(16);

void BM_SplitMerge(benchmark::State& state) {
  const auto spec = resmini();
  const auto params = build_model(spec, 1);
  const CutIndex cut{static_cast<std::size_t>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(merge(spec, split(spec, params, cut)));
}
BENCHMARK(BM_SplitMerge)->Arg(2)->Arg(8);

void BM_Aggregate(benchmark::State& state) {
  const auto spec = resmini();
  const auto global = build_model(spec, 0);
  std::vector<ParameterSet> models;
  for (std::int64_t i = 0; i < state.range(0); ++i) models.push_back(build_model(spec, static_cast<std::uint64_t>(i)));
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(global, models, AggregationMode::FedAvgMean));
}
BENCHMARK(BM_Aggregate)->Arg(4)->Arg(16);

void BM_SelectCut(benchmark::State& state) {
  const SelectionThresholds t{5e7, 1e8, 2e8, 4e8};
  double rate = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(select_cut(rate, t));
    rate = rate * 1.37 + 1.0;
    if (rate > 1e9) rate = 1.0;
  }
}
BENCHMARK(BM_SelectCut);

// One SFL round: 4 vehicles, 32 samples each, batch 16, one epoch.
void BM_SflRound(benchmark::State& state) {
  const auto spec = resmini();
  const auto train = synth_dataset(10, 16, spec.input_shape, 1, 0.3);
  Fleet fleet;
  fleet.partition = partition_iid(train, 4, 2);
  for (std::size_t i = 0; i < 4; ++i) fleet.vehicles.push_back({i, 1e9, {9e7, 0.1}, kInfiniteDwell});
  const RoundContext ctx{spec, train, fleet, {2e10, 1e10}, {1, 16, 1e-3, AggregationMode::FedAvgMean}, 0};
  const RoundState start{0, build_model(spec, 3), 0.0};
  const CutIndex cut{static_cast<std::size_t>(state.range(0))};
  for (auto _ : state) benchmark::DoNotOptimize(run_round_sfl(start, ctx, CutAssignment::uniform(4, cut)));
}
BENCHMARK(BM_SflRound)->Arg(2)->Arg(8)->UseRealTime()->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
