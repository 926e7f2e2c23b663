// Copyright 2026 The advfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "advfuzz/harness.h"

namespace advfuzz {
namespace {

void BM_GoatSeeds(benchmark::State& state) {
  const FuzzTarget& goat = BuiltinGoat();
  const auto seeds = goat.seeds();
  Executor exec(goat);
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(exec.Execute(seeds[i++ % seeds.size()]).outcome);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_GoatSeeds);

void BM_CoveredEdges(benchmark::State& state) {
  const ExecutionResult r = Execute(BuiltinGoat(), BuiltinGoat().seeds().back());
  for (auto _ : state) benchmark::DoNotOptimize(r.coverage.CoveredEdges());
}
BENCHMARK(BM_CoveredEdges);

}  // namespace
}  // namespace advfuzz
