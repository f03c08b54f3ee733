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

#include <span>

namespace qdsim::quality {

/// Parameters of q(a) = z1 · ln(z2 · a + z3).
/// z1 in dB, z2 per bit/s, z3 dimensionless.
struct RQParams {
  double z1 = 1.0;
  double z2 = 1.0;
  double z3 = 1.0;

  bool valid() const noexcept { return z1 > 0.0 && z2 > 0.0 && z3 >= 1.0; }
  bool operator==(const RQParams&) const = default;
};

double quality_of_bitrate(double bitrate, const RQParams& z);
double quality_of_rate(double rate, const RQParams& z);
/// Inverse of quality_of_bitrate on its range.
double bitrate_of_quality(double quality, const RQParams& z);

/// Rescales z2 so that quality can be evaluated on a per-Hz rate in nats:
/// q(B · r / ln 2; z) == q(r; to_nat_units(z, B)).
RQParams to_nat_units(const RQParams& z, double bandwidth_hz);

/// c(e) = −z1 ln(−z2 ln e + z3), 0 < e ≤ 1. Throws MseOutOfRange.
double cost(double mse, const RQParams& z);
/// c′(e) = z1 z2 / (e (−z2 ln e + z3))
double cost_deriv(double mse, const RQParams& z);
/// c is strictly concave on all of (0, 1] iff z3 ≥ z2.
bool cost_is_concave(const RQParams& z);
/// Inverse of c′ on the concave branch. Throws WeightOutOfRange.
double upsilon(double weight, const RQParams& z);

struct RatePoint {
  double bitrate = 0.0;  // bits/s
  double quality = 0.0;  // dB
};

struct RQFit {
  RQParams params;
  double residual_rms = 0.0;
  /// true when the unconstrained optimum left the valid set and was refit on its boundary
  bool projected = false;
};

/// Least-squares fit of q = z1 ln(z2 a + z3). Throws TooFewPoints, NonMonotonePoints.
RQFit fit_rq(std::span<const RatePoint> points);

}  // namespace qdsim::quality
