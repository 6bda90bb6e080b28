/*
 * Copyright 2026 The dcurr Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <benchmark/benchmark.h>

#include "dcurr/curriculum.hpp"
#include "dcurr/dataset.hpp"
#include "dcurr/density.hpp"
#include "dcurr/schedule.hpp"

namespace {

dcurr::FeatureMatrix random_rows(std::size_t n, std::size_t d) {
  dcurr::Rng rng(42);
  dcurr::FeatureMatrix m(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : m.row(i)) v = static_cast<float>(rng.normal());
  }
  return m;
}

void BM_DistanceMatrix(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto threads = static_cast<unsigned>(state.range(1));
  const auto x = random_rows(n, 64);
  for (auto _ : state) benchmark::DoNotOptimize(distance_matrix(x, threads));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * (n - 1) / 2));
}
BENCHMARK(BM_DistanceMatrix)->ArgsProduct({{256, 1024, 2048}, {1, 4}})->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_DensityProfile(benchmark::State& state) {
  const auto dm = distance_matrix(random_rows(static_cast<std::size_t>(state.range(0)), 64), 4);
  for (auto _ : state) benchmark::DoNotOptimize(density_profile(dm, 60.0));
}
BENCHMARK(BM_DensityProfile)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_DesignCurriculum(benchmark::State& state) {
  dcurr::SynthConfig cfg;
  cfg.categories = 20;
  cfg.per_category = static_cast<std::uint32_t>(state.range(0));
  cfg.dim = 32;
  const auto data = dcurr::generate_synthetic(cfg);
  dcurr::CurriculumParams params;
  params.threads = static_cast<unsigned>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(dcurr::design_curriculum(data.features, params));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.features.size()));
}
BENCHMARK(BM_DesignCurriculum)->ArgsProduct({{100, 500}, {1, 4}})->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_NextBatch(benchmark::State& state) {
  dcurr::SynthConfig cfg;
  cfg.categories = 1000;
  cfg.per_category = 20;
  const auto data = dcurr::generate_synthetic(cfg);
  const auto cd = dcurr::design_curriculum(data.features, {});
  const dcurr::SubsetIndex index(cd, data.features);
  const auto stage = dcurr::default_schedule(256, 1.0)[2];
  dcurr::Rng rng(1, dcurr::Stream::Sampler);
  for (auto _ : state) benchmark::DoNotOptimize(dcurr::next_batch(stage, index, rng));
}
BENCHMARK(BM_NextBatch);

}  // namespace

BENCHMARK_MAIN();
