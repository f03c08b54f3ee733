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

#pragma once

/// Rate traces: run the channel and a per-slot solver over a scenario and
/// keep one rate sample per user per second.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qdsim/beamform.hpp"
#include "qdsim/channel.hpp"
#include "qdsim/quality.hpp"

namespace qdsim::tracegen {

struct RateTrace {
  std::size_t user = 0;
  std::vector<double> rate_bps;  // sample s covers [s, s + 1) seconds

  std::size_t duration_s() const noexcept { return rate_bps.size(); }
  bool operator==(const RateTrace&) const = default;
};

/// Video complexity seen by the physical layer: z of chunk floor(t / T_chunk),
/// wrapping around when the video is shorter than the trace.
struct VideoSchedule {
  double chunk_duration_s = 2.0;
  std::vector<quality::RQParams> chunk_z;

  const quality::RQParams& at(double t) const;
};

struct Scenario {
  channel::Topology topology;
  channel::ChannelParams channel;
  beamform::Mode mode = beamform::Mode::Qddra;
  beamform::StopRule stop;
  double duration_s = 300.0;
  std::size_t cadence = 1;     // solve every `cadence` slots, hold beams in between
  std::uint64_t seed = 1;
  double snr_gap = 1.34;
  double bandwidth_hz = 1e6;
  double beta = 0.1;           // weight of the newest slot in the average quality
  double quality_floor = 1e-3; // keeps α = 1/Q finite
  std::vector<VideoSchedule> videos;  // one per user

  void validate() const;
  std::size_t slots_per_second() const;
};

struct Diagnostics {
  std::size_t slots = 0;
  std::size_t solves = 0;
  std::size_t solver_iterations = 0;
  std::size_t backtracks = 0;
  double min_avg_quality = 0.0;  // over all users and slots
  double max_avg_quality = 0.0;
};

struct Generated {
  std::vector<RateTrace> traces;  // one per user
  Diagnostics diagnostics;
  /// per slot and user, only filled when requested
  std::vector<std::vector<double>> slot_rates;
};

Generated generate(const Scenario& scenario, bool keep_slot_rates = false);

/// Independent scenarios, one OpenMP task each.
std::vector<Generated> generate_batch(const std::vector<Scenario>& scenarios);
std::vector<Generated> generate_batch_serial(const std::vector<Scenario>& scenarios);

/// CSV `time_s,user_id,rate_bps`, second-major then user. Throws Io.
void write_trace(const std::vector<RateTrace>& traces, const std::filesystem::path& path);
/// Throws Io or Malformed (with the line number).
std::vector<RateTrace> read_trace(const std::filesystem::path& path);

struct SplitManifest {
  std::vector<std::filesystem::path> train;
  std::vector<std::filesystem::path> test;
  std::vector<std::uint64_t> train_seeds;
  std::vector<std::uint64_t> test_seeds;
};

/// Seeds base_seed .. base_seed + n_train − 1 train, the next n_test test.
/// Writes `<out_dir>/{train,test}_NNN.csv` and `<out_dir>/split.txt`.
SplitManifest make_split(std::size_t n_train, std::size_t n_test, std::uint64_t base_seed,
                         const Scenario& scenario, const std::filesystem::path& out_dir, bool parallel = true);

/// Sections `[train]` and `[test]`, one path per line relative to the manifest.
void write_split(const SplitManifest& split, const std::filesystem::path& path);
SplitManifest read_split(const std::filesystem::path& path);

}  // namespace qdsim::tracegen
