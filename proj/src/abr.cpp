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

#include "qdsim/abr.hpp"

#include <algorithm>
#include <cmath>

#include "qdsim/error.hpp"

namespace qdsim::abr {

double harmonic_mean_nonzero(const std::vector<double>& xs) {
  double inv = 0.0;
  std::size_t n = 0;
  for (double x : xs)
    if (x > 0.0) {
      inv += 1.0 / x;
      ++n;
    }
  return n == 0 ? 0.0 : static_cast<double>(n) / inv;
}

std::size_t rate_based(const Observation& obs) {
  const double predicted = harmonic_mean_nonzero(obs.throughput_bps);
  std::size_t pick = 0;
  for (std::size_t l = 0; l < obs.num_reps(); ++l)
    if (obs.bitrates_bps[l] <= predicted) pick = l;
  return pick;
}

namespace {

void check_thresholds(double reservoir_s, double cushion_s, double buffer_max_s) {
  if (!(reservoir_s > 0.0) || !(cushion_s > 0.0) || reservoir_s + cushion_s > buffer_max_s)
    throw Error(Errc::BadThresholds, "need 0 < reservoir < reservoir + cushion <= buffer size");
}

}  // namespace

std::size_t buffer_based(const Observation& obs, double reservoir_s, double cushion_s) {
  check_thresholds(reservoir_s, cushion_s, obs.buffer_max_s);
  const std::size_t top = obs.num_reps() - 1;
  if (obs.buffer_s <= reservoir_s) return 0;
  if (obs.buffer_s >= reservoir_s + cushion_s) return top;
  const double frac = (obs.buffer_s - reservoir_s) / cushion_s;
  return std::min(top, static_cast<std::size_t>(std::floor(frac * static_cast<double>(top))));
}

BufferBased::BufferBased(double reservoir_s, double cushion_s) : reservoir_s_(reservoir_s), cushion_s_(cushion_s) {
  if (!(reservoir_s > 0.0) || !(cushion_s > 0.0))
    throw Error(Errc::BadThresholds, "reservoir and cushion must be positive");
}

std::size_t BufferBased::decide(const Observation& obs) const {
  return buffer_based(obs, reservoir_s_, cushion_s_);
}

}  // namespace qdsim::abr
