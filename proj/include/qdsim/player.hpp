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

/// Chunk-level DASH playback over a per-second rate trace.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "qdsim/abr.hpp"
#include "qdsim/quality.hpp"
#include "qdsim/tracegen.hpp"

namespace qdsim::player {

using tracegen::RateTrace;

struct Representation {
  double bitrate_bps = 0.0;
  double size_bits = 0.0;
  double quality_db = 0.0;
};

struct Chunk {
  std::vector<Representation> reps;  // ascending bitrate
  quality::RQParams z;               // fitted to reps
};

struct VideoManifest {
  double chunk_duration_s = 2.0;
  std::vector<Chunk> chunks;

  std::size_t num_chunks() const noexcept { return chunks.size(); }
  std::size_t num_reps() const noexcept { return chunks.empty() ? 0 : chunks.front().reps.size(); }
  /// Nominal ladder, taken from the first chunk.
  std::vector<double> bitrates() const;
  /// Throws ConfigInvalid.
  void validate() const;
  /// What the physical layer sees while this video plays.
  tracegen::VideoSchedule schedule() const;
};

/// Throws Io or Malformed.
VideoManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const VideoManifest& manifest, const std::filesystem::path& path);
std::string manifest_to_json(const VideoManifest& manifest);
VideoManifest manifest_from_json(const std::string& text);

/// The bitrate ladder used throughout, bits/s.
std::vector<double> default_ladder();

struct VideoProfile {
  std::string name;
  quality::RQParams z;           // ground truth, bit/s units
  std::size_t chunks = 48;
  double complexity_jitter = 0.0;  // log-std of the per-chunk complexity factor
  double size_spread = 0.1;        // sizes drawn in bitrate·T·[1 − s, 1 + s]
  double chunk_duration_s = 2.0;
  std::uint64_t seed = 1;
  std::vector<double> ladder_bps = default_ladder();
};

/// z with q(lowest rung) = q_low and q(highest rung) = q_high, and
/// z3 = kappa · z2 · B / ln 2 so the receiver cost stays concave for kappa ≥ 1.
quality::RQParams profile_params(double q_low, double q_high, double kappa, double bandwidth_hz,
                                 const std::vector<double>& ladder_bps);

/// Three synthetic videos of differing complexity.
std::vector<VideoProfile> default_profiles(double bandwidth_hz, std::size_t chunks, std::uint64_t seed);

VideoManifest synth_manifest(const VideoProfile& profile);

struct PlayerParams {
  double buffer_max_s = 30.0;
  double switch_penalty = 0.5;   // λ
  double rebuffer_penalty = 4.0; // ρ
  std::size_t history = 8;       // n past chunks in an observation
};

struct SessionState {
  std::size_t next_chunk = 0;
  double buffer_s = 0.0;
  double time_s = 0.0;
  double last_quality_db = 0.0;
  bool has_last = false;
  std::deque<double> throughput_bps;  // newest at the back, at most `history`
  std::deque<double> download_time_s;
};

struct ChunkRecord {
  std::size_t m = 0;
  std::size_t action = 0;
  double bitrate_bps = 0.0;
  double quality_db = 0.0;
  double rebuffer_s = 0.0;
  double wait_s = 0.0;
  double qoe = 0.0;
  double download_s = 0.0;
  double throughput_bps = 0.0;
  double start_s = 0.0;   // wall clock when the request went out
  double buffer_s = 0.0;  // after the chunk, and after any wait
};

struct Download {
  double duration_s = 0.0;
  double throughput_bps = 0.0;
};

/// Exact integration of the piecewise-constant rate from t_start until
/// size_bits have arrived. Throws TraceExhausted.
Download download_chunk(const RateTrace& trace, double t_start, double size_bits);

/// One chunk request. Throws TraceExhausted when the trace ends first.
std::pair<ChunkRecord, SessionState> step(const SessionState& state, std::size_t action,
                                          const VideoManifest& manifest, const RateTrace& trace,
                                          const PlayerParams& params);

abr::Observation observe(const SessionState& state, const VideoManifest& manifest, const PlayerParams& params);

struct SessionSummary {
  std::size_t chunks = 0;
  double mean_qoe = 0.0;
  double mean_quality_db = 0.0;
  double mean_abs_switch_db = 0.0;  // over all chunks, chunk 0 contributing 0
  double total_rebuffer_s = 0.0;
};

SessionSummary summarize(const std::vector<ChunkRecord>& records);

struct Session {
  std::vector<ChunkRecord> records;
  SessionSummary summary;
  SessionState final_state;
  bool trace_exhausted = false;
};

/// Plays until the video ends or the trace runs out.
Session run_session(const RateTrace& trace, const VideoManifest& manifest, const abr::Policy& policy,
                    const PlayerParams& params);

/// CSV `m,bitrate_bps,quality_db,rebuffer_s,wait_s,qoe`. Throws Io.
void write_session_csv(const std::vector<ChunkRecord>& records, const std::filesystem::path& path);

}  // namespace qdsim::player
