// Copyright 2026 The aurec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Microbenchmarks for the hot paths: ranking, both losses and propagation.

#include <benchmark/benchmark.h>

#include <numeric>
#include <random>
#include <vector>

#include "aurec/backbone.h"
#include "aurec/ranking.h"
#include "aurec/rng.h"
#include "aurec/synthetic.h"
#include "aurec/uncertainty.h"

namespace aurec {
namespace {

InteractionDataset Dataset(int users, int items) {
  SyntheticSpec spec;
  spec.num_users = users;
  spec.num_items = items;
  spec.interactions_per_user = 20;
  spec.seed = 3;
  return GenerateSynthetic(spec).dataset;
}

std::vector<UserId> AllUsers(const InteractionDataset& ds) {
  std::vector<UserId> users(ds.num_users());
  std::iota(users.begin(), users.end(), 0);
  return users;
}

void BM_TopK(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  std::mt19937_64 rng(1);
  std::vector<double> scores(n);
  for (auto& s : scores) s = UniformUnit(rng);
  std::vector<ItemId> history;
  for (int i = 0; i < n; i += 25) history.push_back(i);
  for (auto _ : state) benchmark::DoNotOptimize(TopK(scores, history, 20));
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_TopK)->Arg(1'000)->Arg(10'000)->Arg(100'000);

void BM_BackboneLoss(benchmark::State& state) {
  const auto ds = Dataset(200, 500);
  const auto kind = state.range(0) ? BackboneKind::kLightGcn : BackboneKind::kMf;
  const auto model = InitBackbone(kind, ds, 64, 3, 1);
  const auto plan = SampleNegativeWeights(ds, AllUsers(ds), 0.1, 1, 0);
  BackboneGradient grad;
  for (auto _ : state) benchmark::DoNotOptimize(BackboneLoss(model, ds, plan, 1e-4, &grad));
}
BENCHMARK(BM_BackboneLoss)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_UncertaintyBatchLoss(benchmark::State& state) {
  const auto ds = Dataset(200, 500);
  const auto emb = Propagate(InitBackbone(BackboneKind::kMf, ds, 64, 1, 1));
  UncertaintyTrainConfig cfg;
  cfg.dim = static_cast<int>(state.range(0));
  const auto model = InitUncertainty(ds.num_items(), cfg);
  std::vector<UserId> batch(32);
  std::iota(batch.begin(), batch.end(), 0);
  UncertaintyGradient grad;
  for (auto _ : state) {
    benchmark::DoNotOptimize(UncertaintyBatchLoss(model, ds, emb, batch, cfg, &grad));
  }
}
BENCHMARK(BM_UncertaintyBatchLoss)->Arg(32)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Propagate(benchmark::State& state) {
  const auto ds = Dataset(static_cast<int>(state.range(0)), 2 * static_cast<int>(state.range(0)));
  const auto model = InitBackbone(BackboneKind::kLightGcn, ds, 64, 3, 1);
  for (auto _ : state) benchmark::DoNotOptimize(Propagate(model));
}
BENCHMARK(BM_Propagate)->Arg(200)->Arg(2'000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace aurec

BENCHMARK_MAIN();
