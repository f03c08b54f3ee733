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

/// Bitrate adaptation policies. A policy sees one Observation per chunk and
/// returns the representation index to download next.

#include <cstddef>
#include <vector>

#include "qdsim/quality.hpp"

namespace qdsim::abr {

struct Observation {
  // last n chunks, oldest first; zero-padded at the front while fewer exist
  std::vector<double> throughput_bps;
  std::vector<double> download_time_s;
  quality::RQParams next_z;
  std::vector<double> next_quality_db;  // per representation of the next chunk
  std::vector<double> next_size_bits;
  std::vector<double> bitrates_bps;     // nominal ladder, ascending
  double buffer_s = 0.0;
  double buffer_max_s = 30.0;
  double chunk_duration_s = 2.0;
  std::size_t remaining_chunks = 0;  // including the next one
  std::size_t total_chunks = 0;
  double last_quality_db = 0.0;      // 0 before the first chunk

  std::size_t num_reps() const noexcept { return bitrates_bps.size(); }
};

class Policy {
 public:
  virtual ~Policy() = default;
  /// Always returns an index in [0, obs.num_reps()).
  virtual std::size_t decide(const Observation& obs) const = 0;
};

/// Harmonic mean of the nonzero throughput samples; 0 when there are none.
double harmonic_mean_nonzero(const std::vector<double>& xs);

/// Largest bitrate not above the harmonic-mean throughput, else the lowest.
std::size_t rate_based(const Observation& obs);

/// Lowest up to the reservoir, highest from reservoir + cushion, linear
/// (rounded down) in between. Throws BadThresholds unless 0 < r, c > 0, r + c ≤ b_max.
std::size_t buffer_based(const Observation& obs, double reservoir_s, double cushion_s);

class RateBased final : public Policy {
 public:
  std::size_t decide(const Observation& obs) const override { return rate_based(obs); }
};

class BufferBased final : public Policy {
 public:
  BufferBased(double reservoir_s = 5.0, double cushion_s = 20.0);
  std::size_t decide(const Observation& obs) const override;

 private:
  double reservoir_s_;
  double cushion_s_;
};

}  // namespace qdsim::abr
