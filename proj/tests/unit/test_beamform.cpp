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

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../support/oracles.hpp"
#include "qdsim/beamform.hpp"
#include "qdsim/error.hpp"

using namespace qdsim;
using namespace qdsim::beamform;
using numerics::norm2;

namespace {

// One cell, `users` single-antenna users, all with the same scalar channel h.
struct Scalar {
  channel::Topology topo;
  SlotProblem p;

  Scalar(std::size_t users, cplx h, double power, double gap) {
    topo.cells.push_back({{0.0, 0.0}, 1, power});
    for (std::size_t i = 0; i < users; ++i) topo.users.push_back({0, 1});
    p.topology = &topo;
    p.snapshot.num_cells = 1;
    p.snapshot.noise_power = 1.0;
    for (std::size_t i = 0; i < users; ++i) p.snapshot.gains.emplace_back(1, 1, std::vector<cplx>{h});
    p.weights.assign(users, 1.0);
    p.rq.assign(users, quality::RQParams{8.0, 2e-6, 1.2 * 2e-6 * 1e6 / std::numbers::ln2});
    p.snr_gap = gap;
  }
};

double max_cell_power_excess(const SlotProblem& p, const Beams& v) {
  const auto pw = cell_powers(p, v);
  double worst = -1e300;
  for (std::size_t k = 0; k < pw.size(); ++k) worst = std::max(worst, pw[k] - p.topology->cells[k].power_budget);
  return worst;
}

}  // namespace

TEST_CASE("scalar receiver and MSE") {
  Scalar s(1, 1.0, 4.0, 1.0);
  const Beams v{{1.0}};
  const CVector u = mmse_receiver(s.p, v, 0);
  CHECK(std::abs(u[0] - 0.5) < 1e-15);
  CHECK(mse(s.p, v, 0, u) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(mse_mmse_form(s.p, v, 0, u) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(mse(s.p, v, 0, CVector{0.0}) == 1.0);

  const Beams zero{{0.0}};
  CHECK(std::abs(mmse_receiver(s.p, zero, 0)[0]) == 0.0);
}

TEST_CASE("weight_update modes") {
  const quality::RQParams unit{1.0, 1.0, 1.0};
  CHECK(weight_update(1.0, unit, Mode::Qddra) == 1.0);
  CHECK(weight_update(0.5, unit, Mode::Wmmse) == 2.0);
  const quality::RQParams z{6.0, 0.7, 1.1};
  const double e = 0.37;
  const double h = 1e-6;
  const double fd = (quality::cost(e + h, z) - quality::cost(e - h, z)) / (2 * h);
  CHECK(std::fabs(weight_update(e, z, Mode::Qddra) - fd) <= 1e-6 * fd);
  CHECK_THROWS_AS(weight_update(0.0, z, Mode::Wmmse), Error);
  CHECK_THROWS_AS(weight_update(1.5, z, Mode::Qddra), Error);
}

TEST_CASE("scalar transmit update closed forms") {
  Scalar loose(1, 1.0, 4.0, 1.0);
  const Beams u{{1.0}};
  const std::vector<double> w{1.0};
  const TransmitUpdate a = transmit_update(loose.p, u, w);
  CHECK(std::abs(a.v[0][0] - 1.0) < 1e-15);
  CHECK(a.mu[0] == 0.0);

  Scalar tight(1, 1.0, 0.25, 1.0);
  const TransmitUpdate b = transmit_update(tight.p, u, w);
  CHECK(b.mu[0] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(std::abs(b.v[0][0] - 0.5) < 1e-8);
  CHECK(norm2(b.v[0]) <= 0.25);
  CHECK(norm2(b.v[0]) >= 0.25 - 1e-8);
}

TEST_CASE("single-user SISO reaches the gap-adjusted Shannon rate") {
  const cplx h{0.8, -1.1};
  Scalar s(1, h, 4.0, 1.34);
  for (Mode mode : {Mode::Qddra, Mode::Wmmse}) {
    const SlotResult r = solve_slot(s.p, initial_transmit(s.p), mode);
    const double expect = 1e6 * std::log2(1.0 + std::norm(h) * 4.0 / 1.34);
    CHECK(r.rate_bps[0] == doctest::Approx(expect).epsilon(1e-9));
    CHECK(r.quality_db[0] == doctest::Approx(quality::quality_of_rate(expect, s.p.rq[0])).epsilon(1e-9));
  }
}

TEST_CASE("two-cell SISO WMMSE against a power grid") {
  // weak cross links; in strong interference WMMSE can stop at a local maximum
  channel::Topology topo;
  topo.cells = {{{0.0, 0.0}, 1, 4.0}, {{200.0, 0.0}, 1, 4.0}};
  topo.users = {{0, 1}, {1, 1}};
  SlotProblem p;
  p.topology = &topo;
  p.snapshot.num_cells = 2;
  p.snapshot.noise_power = 1.0;
  const cplx h[2][2] = {{{1.2, 0.5}, {0.3, -0.2}}, {{0.1, 0.4}, {-0.9, 0.8}}};  // h[user][cell]
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t k = 0; k < 2; ++k) p.snapshot.gains.emplace_back(1, 1, std::vector<cplx>{h[i][k]});
  p.weights.assign(2, 1.0);
  p.rq.assign(2, quality::RQParams{8.0, 2e-6, 1.2 * 2e-6 * 1e6 / std::numbers::ln2});
  p.snr_gap = 1.34;
  const SlotResult r = solve_slot(p, initial_transmit(p), Mode::Wmmse, {1e-10, 2000});
  double best = 0.0;
  for (int a = 0; a < 200; ++a)
    for (int b = 0; b < 200; ++b) {
      const double p0 = 4.0 * a / 199.0, p1 = 4.0 * b / 199.0;
      const double s0 = p0 * std::norm(h[0][0]) / (1.34 * (1.0 + p1 * std::norm(h[0][1])));
      const double s1 = p1 * std::norm(h[1][1]) / (1.34 * (1.0 + p0 * std::norm(h[1][0])));
      best = std::max(best, 1e6 * (std::log2(1.0 + s0) + std::log2(1.0 + s1)));
    }
  CHECK(r.rate_bps[0] + r.rate_bps[1] >= 0.99 * best);
}

TEST_CASE("identical users get identical allocations") {
  Scalar s(2, cplx{1.3, 0.4}, 4.0, 1.34);
  for (Mode mode : {Mode::Qddra, Mode::Wmmse}) {
    const SlotResult r = solve_slot(s.p, initial_transmit(s.p), mode);
    CHECK(r.rate_bps[0] == doctest::Approx(r.rate_bps[1]).epsilon(1e-9));
    CHECK(r.quality_db[0] == doctest::Approx(r.quality_db[1]).epsilon(1e-9));
  }
}

TEST_CASE("initial transmit splits power equally") {
  std::mt19937_64 rng(30);
  oracle::Instance inst = oracle::random_instance(2, 3, 3, 2, rng);
  const SlotProblem& p = inst.problem();
  const Beams v = initial_transmit(p);
  for (const auto& x : v) CHECK(norm2(x) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("MMSE receiver is locally optimal and satisfies the closed-form MSE") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    oracle::Instance inst = oracle::random_instance(2, 2, 2, 2, rng);
    const SlotProblem& p = inst.problem();
    const Beams v = initial_transmit(p);
    for (std::size_t i = 0; i < p.num_users(); ++i) {
      const CVector u = mmse_receiver(p, v, i);
      const double e = mse(p, v, i, u);
      CHECK(std::fabs(e - mse_mmse_form(p, v, i, u)) <= 1e-10);
      for (std::size_t a = 0; a < u.size(); ++a)
        for (cplx d : {cplx{1e-3, 0}, cplx{-1e-3, 0}, cplx{0, 1e-3}, cplx{0, -1e-3}}) {
          CVector probe = u;
          probe[a] += d;
          CHECK(mse(p, v, i, probe) >= e);
        }
    }
  }
}

TEST_CASE("rate equals -B log2 e at the MMSE receiver") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 50; ++trial) {
    oracle::Instance inst = oracle::random_instance(1 + trial % 3, 1 + trial % 2, 1 + trial % 3, 1 + trial % 2, rng);
    const SlotProblem& p = inst.problem();
    const Beams v = initial_transmit(p);
    for (std::size_t i = 0; i < p.num_users(); ++i) {
      const CVector u = mmse_receiver(p, v, i);
      const double r = rate(p, v, i);
      CHECK(r == doctest::Approx(-p.bandwidth_hz * std::log2(mse(p, v, i, u))).epsilon(1e-9));
    }
  }
}

TEST_CASE("zero beams give zero rate") {
  std::mt19937_64 rng(33);
  oracle::Instance inst = oracle::random_instance(2, 2, 2, 2, rng);
  const SlotProblem& p = inst.problem();
  Beams v = initial_transmit(p);
  for (auto& x : v)
    for (auto& c : x) c = 0.0;
  for (std::size_t i = 0; i < p.num_users(); ++i) CHECK(rate(p, v, i) == 0.0);
}

TEST_CASE("transmit update on MIMO cells is feasible and tight when the multiplier is active") {
  std::mt19937_64 rng(34);
  int active = 0;
  for (int trial = 0; trial < 40; ++trial) {
    oracle::Instance inst = oracle::random_instance(2, 2, 3, 2, rng, trial % 2 ? 30.0 : 0.0);
    const SlotProblem& p = inst.problem();
    const Beams v0 = initial_transmit(p);
    const Beams u = mmse_receivers(p, v0);
    std::vector<double> w;
    for (std::size_t i = 0; i < p.num_users(); ++i) w.push_back(1.0 / mse(p, v0, i, u[i]));
    const TransmitUpdate t = transmit_update(p, u, w);
    const auto pw = cell_powers(p, t.v);
    for (std::size_t k = 0; k < pw.size(); ++k) {
      CHECK(pw[k] <= 4.0 + 1e-6);
      if (t.mu[k] > 0.0) {
        ++active;
        CHECK(pw[k] >= 4.0 - 1e-6);
      }
    }
  }
  CHECK(active > 0);
}

TEST_CASE("ascent and feasibility on random instances") {
  std::mt19937_64 rng(35);
  for (int trial = 0; trial < 60; ++trial) {
    std::uniform_int_distribution<std::size_t> d(1, 3);
    oracle::Instance inst = oracle::random_instance(d(rng), d(rng), d(rng), d(rng), rng);
    const SlotProblem& p = inst.problem();
    for (Mode mode : {Mode::Qddra, Mode::Wmmse}) {
      const SlotResult r = solve_slot(p, initial_transmit(p), mode);
      for (std::size_t k = 1; k < r.objective.size(); ++k)
        CHECK(r.objective[k] >= r.objective[k - 1] - 1e-8 * std::fabs(r.objective[k - 1]));
      for (double viol : r.max_power_violation) CHECK(viol <= 1e-6);
      CHECK(r.backtracks == 0);
      for (double e : r.beams.e) {
        CHECK(e > 0.0);
        CHECK(e <= 1.0);
      }
      for (double w : r.beams.w) CHECK(w > 0.0);
      CHECK(max_cell_power_excess(p, r.beams.v) <= 1e-6);
    }
  }
}

TEST_CASE("parallel kernels match the serial reference") {
  std::mt19937_64 rng(36);
  oracle::Instance inst = oracle::random_instance(4, 5, 3, 2, rng);
  const SlotProblem& p = inst.problem();
  const Beams v = initial_transmit(p);
  const Beams u_par = mmse_receivers(p, v);
  const Beams u_ser = mmse_receivers_serial(p, v);
  CHECK(u_par == u_ser);
  std::vector<double> w(p.num_users(), 1.5);
  const TransmitUpdate a = transmit_update(p, u_par, w);
  const TransmitUpdate b = transmit_update_serial(p, u_ser, w);
  CHECK(a.v == b.v);
  CHECK(a.mu == b.mu);
}

TEST_CASE("average quality recursion") {
  CHECK(update_avg_quality(12.0, 40.0, 1.0) == 40.0);
  CHECK(update_avg_quality(30.0, 40.0, 0.1) == doctest::Approx(31.0));
  double q = 0.0;
  for (int t = 0; t < 200; ++t) q = update_avg_quality(q, 35.0, 0.1);
  CHECK(q == doctest::Approx(35.0).epsilon(1e-8));
}

TEST_CASE("problem validation") {
  Scalar s(1, 1.0, 4.0, 1.34);
  s.p.weights[0] = 0.0;
  CHECK_THROWS_AS(solve_slot(s.p, Beams{{1.0}}, Mode::Qddra), Error);
  Scalar g(1, 1.0, 4.0, 0.5);
  CHECK_THROWS_AS(solve_slot(g.p, Beams{{1.0}}, Mode::Qddra), Error);
}
