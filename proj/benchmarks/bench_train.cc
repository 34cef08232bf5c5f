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

#include <vector>

#include "hazboost/boosting.h"
#include "hazboost/preprocess.h"
#include "hazboost/simulate.h"

namespace hazboost {
namespace {

PreprocessedData Binned(std::size_t subjects, std::size_t irrelevant) {
  SimConfig c;
  c.hazard_id = 1;
  c.recurring = true;
  c.num_subjects = subjects;
  c.num_irrelevant = irrelevant;
  c.seed = 1;
  const Dataset d = SimulateDataset(c).dataset;
  return Preprocess(d, BuildGrid(d, kMaxBins, QuantileMode::kRaw));
}

void BM_Histograms(benchmark::State& state) {
  const PreprocessedData p = Binned(2000, static_cast<std::size_t>(state.range(0)));
  const auto m = TrainingMatrix::View(p);
  const std::vector<std::int32_t> leaf(p.num_rows(), 0);
  const std::vector<double> f(p.num_rows(), 0.0);
  for (auto _ : state) benchmark::DoNotOptimize(AccumulateHistograms(m, leaf, f, 1));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.num_rows()));
}
BENCHMARK(BM_Histograms)->Arg(0)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_FitRound(benchmark::State& state) {
  const PreprocessedData p = Binned(2000, 4);
  BoostConfig config;
  config.max_depth = static_cast<int>(state.range(0));
  config.num_rounds = 10;
  config.coalesce_rows = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(Fit(p, config));
  state.SetItemsProcessed(state.iterations() * config.num_rounds);
}
BENCHMARK(BM_FitRound)->ArgsProduct({{1, 3, 5}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace hazboost

BENCHMARK_MAIN();
