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

#include "qdsim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qdsim/error.hpp"

namespace qdsim::channel {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::vector<std::size_t> Topology::users_in_cell(std::size_t cell) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < users.size(); ++i)
    if (users[i].cell == cell) out.push_back(i);
  return out;
}

void Topology::validate() const {
  if (cells.empty() || users.empty()) throw Error(Errc::ConfigInvalid, "topology needs cells and users");
  if (!(min_radius > 0.0) || !(min_radius < radius))
    throw Error(Errc::ConfigInvalid, "need 0 < min_radius < radius");
  for (const auto& c : cells) {
    if (c.tx_antennas < 1) throw Error(Errc::ConfigInvalid, "cell without transmit antennas");
    if (!(c.power_budget > 0.0)) throw Error(Errc::ConfigInvalid, "power budget must be positive");
  }
  for (const auto& u : users) {
    if (u.cell >= cells.size()) throw Error(Errc::ConfigInvalid, "user assigned to a missing cell");
    if (u.rx_antennas < 1) throw Error(Errc::ConfigInvalid, "user without receive antennas");
  }
}

Topology make_grid_topology(std::size_t cells, std::size_t users_per_cell, std::size_t tx_antennas,
                            std::size_t rx_antennas, double power_budget, double radius,
                            double min_radius) {
  Topology topo;
  topo.radius = radius;
  topo.min_radius = min_radius;
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(cells))));
  for (std::size_t k = 0; k < cells; ++k) {
    const Point p{2.0 * radius * static_cast<double>(k % cols),
                  2.0 * radius * static_cast<double>(k / cols)};
    topo.cells.push_back({p, tx_antennas, power_budget});
    for (std::size_t i = 0; i < users_per_cell; ++i) topo.users.push_back({k, rx_antennas});
  }
  topo.validate();
  return topo;
}

namespace {

Point uniform_in_annulus(Point center, double r_min, double r_max, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = std::sqrt(r_min * r_min + unit(rng) * (r_max * r_max - r_min * r_min));
  const double theta = 2.0 * std::numbers::pi * unit(rng);
  return {center.x + r * std::cos(theta), center.y + r * std::sin(theta)};
}

std::vector<double> draw_shadowing(std::size_t cells, double sigma_db, Rng& rng) {
  std::normal_distribution<double> normal(0.0, sigma_db);
  std::vector<double> out(cells, 0.0);
  if (sigma_db > 0.0)
    for (auto& s : out) s = normal(rng);
  return out;
}

}  // namespace

MobilityState init_positions(const Topology& topology, const ChannelParams& params, Rng& rng) {
  topology.validate();
  MobilityState state;
  state.next_move_time = params.move_period;
  for (const auto& user : topology.users) {
    const Point bs = topology.cells[user.cell].position;
    state.positions.push_back(uniform_in_annulus(bs, topology.min_radius, topology.radius, rng));
    state.shadowing_db.push_back(draw_shadowing(topology.num_cells(), params.shadowing_sigma_db, rng));
  }
  return state;
}

MobilityState step_mobility(MobilityState state, const Topology& topology, const ChannelParams& params,
                            double t, Rng& rng) {
  constexpr int kMaxAttempts = 32;
  if (t + 1e-9 < state.next_move_time) return state;
  while (state.next_move_time <= t + 1e-9) state.next_move_time += params.move_period;

  const double step = params.walking_speed * params.move_period;
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (std::size_t i = 0; i < topology.num_users(); ++i) {
    if (step <= 0.0) continue;
    const Point bs = topology.cells[topology.users[i].cell].position;
    const Point from = state.positions[i];
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      const double theta = angle(rng);
      const Point to{from.x + step * std::cos(theta), from.y + step * std::sin(theta)};
      const double d = distance(to, bs);
      if (d >= topology.min_radius && d <= topology.radius) {
        state.positions[i] = to;
        state.shadowing_db[i] = draw_shadowing(topology.num_cells(), params.shadowing_sigma_db, rng);
        break;
      }
    }
  }
  return state;
}

double large_scale_gain(double distance, double shadowing_db, double min_radius, double exponent) {
  if (distance < min_radius) {
    std::ostringstream os;
    os << "distance " << distance << " below minimum " << min_radius;
    throw Error(Errc::DistanceBelowMinimum, os.str());
  }
  return std::pow(distance / min_radius, -exponent) * std::pow(10.0, shadowing_db / 10.0);
}

double fading_correlation(const ChannelParams& params) {
  return numerics::bessel_j0(2.0 * std::numbers::pi * params.doppler_hz * params.slot_s);
}

FadingState init_fading(const Topology& topology, double correlation, Rng& rng) {
  FadingState f;
  f.num_cells = topology.num_cells();
  f.correlation = correlation;
  f.gains.reserve(topology.num_users() * topology.num_cells());
  for (const auto& user : topology.users)
    for (const auto& cell : topology.cells) {
      const std::size_t n = user.rx_antennas * cell.tx_antennas;
      f.gains.emplace_back(user.rx_antennas, cell.tx_antennas, numerics::sample_cscg(n, 1.0, rng));
    }
  return f;
}

FadingState step_fading(FadingState fading, Rng& rng) {
  const double zeta = fading.correlation;
  const double innovation = std::max(0.0, 1.0 - zeta * zeta);
  for (auto& g : fading.gains) {
    const auto xi = numerics::sample_cscg(g.entries().size(), innovation, rng);
    auto entries = g.entries();
    for (std::size_t i = 0; i < entries.size(); ++i) entries[i] = zeta * entries[i] + xi[i];
  }
  return fading;
}

ChannelSnapshot snapshot(const Topology& topology, const ChannelParams& params,
                         const MobilityState& mobility, const FadingState& fading, std::size_t slot) {
  const std::size_t users = topology.num_users();
  const std::size_t cells = topology.num_cells();
  if (mobility.positions.size() != users || mobility.shadowing_db.size() != users ||
      fading.num_cells != cells || fading.gains.size() != users * cells)
    throw Error(Errc::ShapeMismatch, "mobility/fading state does not match topology");

  const double ref_gain = std::pow(10.0, params.ref_gain_db / 10.0);
  ChannelSnapshot snap;
  snap.slot = slot;
  snap.num_cells = cells;
  snap.noise_power = params.noise_power;
  snap.gains.reserve(users * cells);
  for (std::size_t i = 0; i < users; ++i) {
    for (std::size_t k = 0; k < cells; ++k) {
      const CMatrix& g = fading.at(i, k);
      if (g.rows() != topology.users[i].rx_antennas || g.cols() != topology.cells[k].tx_antennas)
        throw Error(Errc::ShapeMismatch, "fading matrix shape mismatch");
      if (mobility.shadowing_db[i].size() != cells)
        throw Error(Errc::ShapeMismatch, "shadowing table shape mismatch");
      const double d = std::max(distance(mobility.positions[i], topology.cells[k].position),
                                topology.min_radius);
      const double gain = ref_gain * large_scale_gain(d, mobility.shadowing_db[i][k], topology.min_radius,
                                                      params.pathloss_exponent);
      snap.gains.push_back(cplx{std::sqrt(gain), 0.0} * g);
    }
  }
  return snap;
}

ChannelEngine::ChannelEngine(Topology topology, ChannelParams params, std::uint64_t seed)
    : topology_(std::move(topology)), params_(params), rng_(seed) {
  mobility_ = init_positions(topology_, params_, rng_);
  fading_ = init_fading(topology_, fading_correlation(params_), rng_);
}

ChannelSnapshot ChannelEngine::current() const {
  return snapshot(topology_, params_, mobility_, fading_, slot_);
}

void ChannelEngine::advance() {
  ++slot_;
  const double t = static_cast<double>(slot_) * params_.slot_s;
  mobility_ = step_mobility(std::move(mobility_), topology_, params_, t, rng_);
  fading_ = step_fading(std::move(fading_), rng_);
}

}  // namespace qdsim::channel
