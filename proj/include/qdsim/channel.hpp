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

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qdsim/numerics.hpp"

namespace qdsim::channel {

using numerics::CMatrix;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b);

struct Cell {
  Point position;
  std::size_t tx_antennas = 1;
  double power_budget = 4.0;  // watts
};

struct User {
  std::size_t cell = 0;
  std::size_t rx_antennas = 1;
};

struct Topology {
  std::vector<Cell> cells;
  std::vector<User> users;
  double radius = 100.0;     // meters
  double min_radius = 10.0;  // meters

  std::size_t num_cells() const noexcept { return cells.size(); }
  std::size_t num_users() const noexcept { return users.size(); }
  std::vector<std::size_t> users_in_cell(std::size_t cell) const;
  /// Throws ConfigInvalid when an invariant does not hold.
  void validate() const;
};

/// Cells on a square grid with spacing 2·radius, users_per_cell users each.
Topology make_grid_topology(std::size_t cells, std::size_t users_per_cell, std::size_t tx_antennas,
                            std::size_t rx_antennas, double power_budget, double radius,
                            double min_radius);

struct ChannelParams {
  double pathloss_exponent = 3.0;
  double shadowing_sigma_db = 8.0;
  double ref_gain_db = 30.0;  // power gain of the direct link at min_radius, no shadowing
  double walking_speed = 1.4;  // m/s
  double move_period = 5.0;    // s
  double doppler_hz = 10.0;
  double slot_s = 0.04;
  double noise_power = 1.0;  // watts
};

struct MobilityState {
  std::vector<Point> positions;
  /// shadowing_db[user][cell]; redrawn when the user's position changes
  std::vector<std::vector<double>> shadowing_db;
  double next_move_time = 0.0;
};

struct FadingState {
  std::size_t num_cells = 0;
  double correlation = 0.0;  // ζ = J0(2π f_d T_slot)
  /// small-scale gain per (user, cell), index user * num_cells + cell
  std::vector<CMatrix> gains;

  const CMatrix& at(std::size_t user, std::size_t cell) const { return gains[user * num_cells + cell]; }
};

struct ChannelSnapshot {
  std::size_t slot = 0;
  std::size_t num_cells = 0;
  double noise_power = 1.0;
  /// H(user, cell), N_ra(user) × N_ta(cell), index user * num_cells + cell
  std::vector<CMatrix> gains;

  const CMatrix& h(std::size_t user, std::size_t cell) const { return gains[user * num_cells + cell]; }
  std::size_t num_users() const noexcept { return num_cells == 0 ? 0 : gains.size() / num_cells; }
};

MobilityState init_positions(const Topology& topology, const ChannelParams& params, Rng& rng);

/// Moves every user once per move epoch (t ≥ next_move_time); otherwise returns the state unchanged.
MobilityState step_mobility(MobilityState state, const Topology& topology, const ChannelParams& params,
                            double t, Rng& rng);

/// (distance / min_radius)^(−exponent) · 10^(shadowing_db / 10)
double large_scale_gain(double distance, double shadowing_db, double min_radius, double exponent);

double fading_correlation(const ChannelParams& params);

/// Stationary start: every entry CN(0, 1).
FadingState init_fading(const Topology& topology, double correlation, Rng& rng);

/// G ← ζ G + ξ with ξ ~ CN(0, 1 − ζ²) entrywise.
FadingState step_fading(FadingState fading, Rng& rng);

/// H(u, k) = sqrt(ref_gain · large_scale_gain(u, k)) · G(u, k)
ChannelSnapshot snapshot(const Topology& topology, const ChannelParams& params,
                         const MobilityState& mobility, const FadingState& fading, std::size_t slot);

/// Owns the evolving channel of one simulation run.
class ChannelEngine {
 public:
  ChannelEngine(Topology topology, ChannelParams params, std::uint64_t seed);

  const Topology& topology() const noexcept { return topology_; }
  const ChannelParams& params() const noexcept { return params_; }
  const MobilityState& mobility() const noexcept { return mobility_; }
  const FadingState& fading() const noexcept { return fading_; }
  std::size_t slot() const noexcept { return slot_; }

  ChannelSnapshot current() const;
  /// Moves to the next slot: mobility epoch check, then fading step.
  void advance();

 private:
  Topology topology_;
  ChannelParams params_;
  Rng rng_;
  MobilityState mobility_;
  FadingState fading_;
  std::size_t slot_ = 0;
};

}  // namespace qdsim::channel
