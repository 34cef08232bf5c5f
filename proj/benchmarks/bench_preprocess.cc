// Copyright 2026 The hazboost Authors.
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

#include <benchmark/benchmark.h>

#include "hazboost/preprocess.h"
#include "hazboost/quantiles.h"
#include "hazboost/simulate.h"

namespace hazboost {
namespace {

Dataset Simulated(std::size_t subjects, std::size_t irrelevant) {
  SimConfig c;
  c.hazard_id = 1;
  c.recurring = true;
  c.num_subjects = subjects;
  c.num_irrelevant = irrelevant;
  c.seed = 1;
  return SimulateDataset(c).dataset;
}

void BM_BuildGrid(benchmark::State& state) {
  const Dataset d = Simulated(static_cast<std::size_t>(state.range(0)), 4);
  const auto mode = state.range(1) == 0 ? QuantileMode::kRaw : QuantileMode::kWeighted;
  for (auto _ : state) benchmark::DoNotOptimize(BuildGrid(d, kMaxBins, mode));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.num_rows()));
}
BENCHMARK(BM_BuildGrid)->ArgsProduct({{500, 5000}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_Preprocess(benchmark::State& state) {
  const Dataset d = Simulated(static_cast<std::size_t>(state.range(0)), 4);
  const CandidateGrid grid = BuildGrid(d, kMaxBins, QuantileMode::kRaw);
  for (auto _ : state) benchmark::DoNotOptimize(Preprocess(d, grid));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.num_rows()));
}
BENCHMARK(BM_Preprocess)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace hazboost

BENCHMARK_MAIN();
