// SPDX-License-Identifier: Apache-2.0
//
// qdsim: cross-layer multiuser video streaming simulator
// Copyright (C) 2026 The qdsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Serial reference against the OpenMP path for the parallel kernels.
// With a single core the two should match; more cores show the speedup.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "../tests/support/oracles.hpp"
#include "qdsim/beamform.hpp"
#include "qdsim/player.hpp"
#include "qdsim/tracegen.hpp"

using namespace qdsim;

namespace {

oracle::Instance& big_instance() {
  static oracle::Instance inst = [] {
    std::mt19937_64 rng(1);
    return oracle::random_instance(8, 4, 4, 2, rng);
  }();
  return inst;
}

void BM_MmseReceivers(benchmark::State& state) {
  auto& inst = big_instance();
  const auto& p = inst.problem();
  const auto v = beamform::initial_transmit(p);
  const bool parallel = state.range(0) != 0;
  for (auto _ : state) {
    auto u = parallel ? beamform::mmse_receivers(p, v) : beamform::mmse_receivers_serial(p, v);
    benchmark::DoNotOptimize(u);
  }
}
BENCHMARK(BM_MmseReceivers)->ArgName("omp")->Arg(0)->Arg(1);

void BM_TransmitUpdate(benchmark::State& state) {
  auto& inst = big_instance();
  const auto& p = inst.problem();
  const auto v = beamform::initial_transmit(p);
  const auto u = beamform::mmse_receivers_serial(p, v);
  std::vector<double> w(p.num_users());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 1.0 / beamform::mse(p, v, i, u[i]);
  const bool parallel = state.range(0) != 0;
  for (auto _ : state) {
    auto t = parallel ? beamform::transmit_update(p, u, w) : beamform::transmit_update_serial(p, u, w);
    benchmark::DoNotOptimize(t);
  }
}
BENCHMARK(BM_TransmitUpdate)->ArgName("omp")->Arg(0)->Arg(1);

void BM_GenerateBatch(benchmark::State& state) {
  std::vector<tracegen::Scenario> jobs;
  const auto m = player::synth_manifest(player::default_profiles(1e6, 48, 7)[1]);
  for (std::uint64_t s = 0; s < 4; ++s) {
    tracegen::Scenario sc;
    sc.topology = channel::make_grid_topology(1, 4, 1, 1, 4.0, 100.0, 10.0);
    sc.duration_s = 5.0;
    sc.seed = s;
    sc.videos.assign(4, m.schedule());
    jobs.push_back(sc);
  }
  const bool parallel = state.range(0) != 0;
  for (auto _ : state) {
    auto g = parallel ? tracegen::generate_batch(jobs) : tracegen::generate_batch_serial(jobs);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_GenerateBatch)->ArgName("omp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
