// Copyright 2026 The Episode Forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <memory>
#include <vector>

#include <benchmark/benchmark.h>

#include "episode_forge/diversity.h"
#include "episode_forge/dpp.h"
#include "episode_forge/episodes.h"
#include "episode_forge/geometry.h"
#include "episode_forge/rng.h"

namespace episode_forge {
namespace {

std::vector<Vector> RandomRows(std::size_t m, std::size_t n, RandomStream& rng) {
  std::vector<Vector> rows(m, Vector(n));
  for (auto& r : rows) {
    for (double& x : r) x = rng.Normal();
  }
  return rows;
}

void BM_GramVolumeSq(benchmark::State& state) {
  RandomStream rng(1);
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto rows = RandomRows(m, 2 * m, rng);
  for (auto _ : state) benchmark::DoNotOptimize(GramVolumeSq(rows));
}
BENCHMARK(BM_GramVolumeSq)->Arg(2)->Arg(5)->Arg(8)->Arg(16)->Arg(32);

void BM_KdppSample(benchmark::State& state) {
  const auto w = SynthGaussianWorld(static_cast<int>(state.range(0)), 16, 1.0, 0.1, 2);
  const LEnsemble ens = LEnsemble::FromEmbeddings(w.table, w.pool.classes());
  RandomStream rng(3);
  for (auto _ : state) benchmark::DoNotOptimize(KdppSample(ens, 5, rng));
}
BENCHMARK(BM_KdppSample)->Arg(20)->Arg(50)->Arg(200);

void BM_EnsembleConstruction(benchmark::State& state) {
  const auto w = SynthGaussianWorld(static_cast<int>(state.range(0)), 16, 1.0, 0.1, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(LEnsemble::FromEmbeddings(w.table, w.pool.classes()));
  }
}
BENCHMARK(BM_EnsembleConstruction)->Arg(50)->Arg(200);

void BM_OverallDiversity(benchmark::State& state) {
  const auto w = SynthGaussianWorld(50, 16, 1.0, 0.1, 5);
  const auto table = std::make_shared<const EmbeddingTable>(w.table);
  SamplerConfig base;
  base.kind = static_cast<SamplerKind>(state.range(0));
  const DiversityProtocol protocol;
  for (auto _ : state) {
    benchmark::DoNotOptimize(OverallDiversity(base, w.pool, table, protocol).raw);
  }
}
BENCHMARK(BM_OverallDiversity)
    ->Arg(static_cast<int>(SamplerKind::kUniform))
    ->Arg(static_cast<int>(SamplerKind::kSdpp));

}  // namespace
}  // namespace episode_forge

// The packaged benchmark_main archive carries LTO bytecode from another
// compiler release, so the entry point is defined here.
BENCHMARK_MAIN();
