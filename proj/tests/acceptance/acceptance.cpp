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

// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// also writes them to acceptance_report.txt in the working directory.
//
//   acceptance [--strict] [--only N[,N...]] [--work DIR]
//
// Without --strict the exit code only reflects crashes, so a criterion that
// fails on merit is reported without failing the build.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "../support/oracles.hpp"
#include "../support/player_oracle.hpp"
#include "../support/rl_oracle.hpp"
#include "qdsim/beamform.hpp"
#include "qdsim/channel.hpp"
#include "qdsim/cli.hpp"
#include "qdsim/error.hpp"
#include "qdsim/player.hpp"
#include "qdsim/rl.hpp"
#include "qdsim/tracegen.hpp"

using namespace qdsim;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ---- 1 and 2: ascent and feasibility sweep ----

struct SweepStats {
  int instances = 0;
  int ascent_failures = 0;
  double worst_drop = 0.0;  // largest relative decrease seen
  int power_failures = 0;
  double worst_violation = -1e300;
  double seconds = 0.0;
};

const SweepStats& solver_sweep() {
  static SweepStats stats = [] {
    SweepStats s;
    const auto t0 = Clock::now();
    std::mt19937_64 rng(20240501);
    std::uniform_int_distribution<std::size_t> cells(1, 4);
    std::uniform_int_distribution<std::size_t> users(1, 4);
    std::uniform_int_distribution<std::size_t> ant(1, 3);
    for (int trial = 0; trial < 500; ++trial) {
      auto inst = oracle::random_instance(cells(rng), users(rng), ant(rng), ant(rng), rng);
      const auto& p = inst.problem();
      ++s.instances;
      for (auto mode : {beamform::Mode::Qddra, beamform::Mode::Wmmse}) {
        const auto r = beamform::solve_slot(p, beamform::initial_transmit(p), mode);
        bool ok = true;
        for (std::size_t k = 1; k < r.objective.size(); ++k) {
          const double drop = (r.objective[k - 1] - r.objective[k]) / std::max(std::fabs(r.objective[k - 1]), 1e-300);
          s.worst_drop = std::max(s.worst_drop, drop);
          if (drop > 1e-8) ok = false;
        }
        if (!ok) ++s.ascent_failures;
        bool feasible = true;
        for (double v : r.max_power_violation) {
          s.worst_violation = std::max(s.worst_violation, v);
          if (v > 1e-6) feasible = false;
        }
        if (!feasible) ++s.power_failures;
      }
    }
    s.seconds = seconds_since(t0);
    return s;
  }();
  return stats;
}

Outcome criterion1() {
  const auto& s = solver_sweep();
  return {s.ascent_failures == 0 && s.seconds < 120.0,
          fmt("%d instances x 2 modes, %d non-monotone trajectories, worst relative drop %.2e, %.1f s",
              s.instances, s.ascent_failures, s.worst_drop, s.seconds)};
}

Outcome criterion2() {
  const auto& s = solver_sweep();
  return {s.power_failures == 0,
          fmt("%d solves, %d with a budget excess > 1e-6, worst excess %.2e W", 2 * s.instances, s.power_failures,
              s.worst_violation)};
}

// ---- 3: rate and MSE ----

Outcome criterion3() {
  // Evaluated at the initial beams and at random beams: users the solver
  // switches off sit at rates of ~1e-9 bit/s where the identity is lost in
  // rounding, so converged points say nothing about it.
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> d(1, 3);
  double worst = 0.0;
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto inst = oracle::random_instance(d(rng), d(rng), d(rng), d(rng), rng);
    inst.slot.snr_gap = 1.0 + std::uniform_real_distribution<double>(0.0, 2.0)(rng);
    const auto& p = inst.problem();
    beamform::Beams random_v;
    for (std::size_t i = 0; i < p.num_users(); ++i) {
      const auto& cell = p.topology->cells[p.cell_of(i)];
      auto v = oracle::random_vector(cell.tx_antennas, rng);
      const double n = std::sqrt(numerics::norm2(v));
      for (auto& x : v) x *= std::sqrt(cell.power_budget / static_cast<double>(p.topology->users_in_cell(p.cell_of(i)).size())) / n;
      random_v.push_back(v);
    }
    for (const auto& v : {beamform::initial_transmit(p), random_v}) {
      const auto u = beamform::mmse_receivers_serial(p, v);
      for (std::size_t i = 0; i < p.num_users(); ++i) {
        const double rate = beamform::rate(p, v, i);
        const double via_mse = -p.bandwidth_hz * std::log2(beamform::mse(p, v, i, u[i]));
        worst = std::max(worst, std::fabs(rate - via_mse) / rate);
        ++checked;
      }
    }
  }
  return {worst <= 1e-9, fmt("%d user rates on 200 instances, worst relative gap %.2e", checked, worst)};
}

// ---- 4: WMMSE against exhaustive power search ----

Outcome criterion4() {
  std::mt19937_64 rng(4);
  double worst = 1e300;
  int below = 0;
  int local = 0;  // shortfalls where WMMSE sits at a full-power KKT point
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = oracle::random_instance(2, 1, 1, 1, rng);
    for (auto& w : inst.slot.weights) w = 1.0;
    const auto& p = inst.problem();
    const auto r = beamform::solve_slot(p, beamform::initial_transmit(p), beamform::Mode::Wmmse, {1e-10, 2000});
    const double got = r.rate_bps[0] + r.rate_bps[1];
    // scalar links: SINR_i = p_i g_ii / (Γ (σ² + p_j g_ij))
    const double g00 = std::norm(p.h(0, 0)(0, 0)), g11 = std::norm(p.h(1, 1)(0, 0));
    const double g01 = std::norm(p.h(0, 1)(0, 0)), g10 = std::norm(p.h(1, 0)(0, 0));
    const double budget = p.topology->cells[0].power_budget;
    double best = 0.0;
    for (int a = 0; a < 200; ++a)
      for (int b = 0; b < 200; ++b) {
        const double p0 = budget * a / 199.0, p1 = budget * b / 199.0;
        const double s0 = p0 * g00 / (p.snr_gap * (p.noise() + p1 * g01));
        const double s1 = p1 * g11 / (p.snr_gap * (p.noise() + p0 * g10));
        best = std::max(best, p.bandwidth_hz * (std::log2(1.0 + s0) + std::log2(1.0 + s1)));
      }
    const double ratio = got / best;
    if (ratio < 0.99) {
      // is the returned power pair a KKT point of the sum rate on the box?
      const auto pw = beamform::cell_powers(p, r.beams.v);
      auto sum_rate = [&](double p0, double p1) {
        return std::log2(1.0 + p0 * g00 / (p.snr_gap * (p.noise() + p1 * g01))) +
               std::log2(1.0 + p1 * g11 / (p.snr_gap * (p.noise() + p0 * g10)));
      };
      const double eps = 1e-6;
      const double d0 = (sum_rate(pw[0], pw[1]) - sum_rate(pw[0] - eps, pw[1])) / eps;
      const double d1 = (sum_rate(pw[0], pw[1]) - sum_rate(pw[0], pw[1] - eps)) / eps;
      const bool corner = pw[0] > budget - 1e-6 && pw[1] > budget - 1e-6;
      if (corner && d0 >= 0.0 && d1 >= 0.0) ++local;
    }
    worst = std::min(worst, ratio);
    if (ratio < 0.99) ++below;
  }
  return {below == 0, fmt("20 instances, worst WMMSE / grid sum-rate %.4f, %d below 0.99 (%d of them stopped at the "
                              "full-power corner, a local maximum of the sum rate)",
                              worst, below, local)};
}

// ---- 5: rate fairness ordering ----

Outcome criterion5() {
  const auto t0 = Clock::now();
  cli::RunConfig c;
  c.duration_s = 60.0;
  const auto profiles = cli::user_profiles(c);
  std::vector<player::VideoManifest> videos;
  for (const auto& p : profiles) videos.push_back(player::synth_manifest(p));
  const std::size_t n = 20;
  double unf[2] = {0, 0}, sum_rate[2] = {0, 0};
  const beamform::Mode modes[2] = {beamform::Mode::Qddra, beamform::Mode::Wmmse};
  for (int m = 0; m < 2; ++m) {
    std::vector<tracegen::Scenario> jobs;
    for (std::size_t k = 0; k < n; ++k) {
      c.seed = 500 + k;
      jobs.push_back(cli::make_scenario(c, modes[m], videos));
    }
    for (const auto& g : tracegen::generate_batch(jobs)) {
      unf[m] += cli::rate_unfairness(g.traces);
      for (const auto& t : g.traces) {
        double s = 0.0;
        for (double r : t.rate_bps) s += r;
        sum_rate[m] += s / static_cast<double>(t.rate_bps.size());
      }
    }
    unf[m] /= n;
    sum_rate[m] /= n;
  }
  const double secs = seconds_since(t0);
  return {unf[0] < unf[1] && sum_rate[1] >= sum_rate[0] && secs < 1800.0,
          fmt("unfairness qddra %.4f vs wmmse %.4f; sum rate qddra %.3f vs wmmse %.3f Mbps; %.1f s", unf[0], unf[1],
              sum_rate[0] * 1e-6, sum_rate[1] * 1e-6, secs)};
}

// ---- 6: fading statistics ----

Outcome criterion6() {
  const auto topo = channel::make_grid_topology(1, 1, 1, 1, 4.0, 100.0, 10.0);
  const double zeta = channel::fading_correlation(channel::ChannelParams{});
  Rng rng(6);
  auto f = channel::init_fading(topo, zeta, rng);
  const std::size_t n = 1000000;
  double power = 0.0;
  std::complex<double> lag = 0.0;
  auto prev = f.gains[0](0, 0);
  for (std::size_t t = 0; t < n; ++t) {
    f = channel::step_fading(std::move(f), rng);
    const auto g = f.gains[0](0, 0);
    power += std::norm(g);
    lag += g * std::conj(prev);
    prev = g;
  }
  const double var = power / static_cast<double>(n);
  const double rho = lag.real() / power;
  return {std::fabs(rho - zeta) <= 0.01 && std::fabs(var - 1.0) <= 0.01,
          fmt("lag-1 %.5f vs zeta %.5f, variance %.5f over 1e6 steps", rho, zeta, var)};
}

// ---- 7: player against the 1 ms simulation ----

Outcome criterion7() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const player::PlayerParams pp;
  double worst = 0.0;
  std::size_t chunks = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = player::synth_manifest(player::default_profiles(1e6, 48, 1000 + trial)[trial % 3]);
    tracegen::RateTrace tr{0, {}};
    const double scale = 0.3e6 + 3e6 * u(rng);
    for (int k = 0; k < 600; ++k) tr.rate_bps.push_back(u(rng) < 0.05 ? 0.0 : scale * (0.2 + 1.6 * u(rng)));
    std::vector<std::size_t> actions;
    for (std::size_t k = 0; k < m.num_chunks(); ++k) actions.push_back(static_cast<std::size_t>(u(rng) * 6.0));
    player::SessionState s;
    for (std::size_t k = 0; k < m.num_chunks(); ++k) {
      const double size = m.chunks[k].reps[actions[k]].size_bits;
      const auto ref = oracle::tick_chunk(tr.rate_bps, s.time_s, s.buffer_s, size, m.chunk_duration_s,
                                          pp.buffer_max_s, k == 0);
      std::pair<player::ChunkRecord, player::SessionState> out;
      try {
        out = player::step(s, actions[k], m, tr, pp);
      } catch (const Error& e) {
        if (e.code() != Errc::TraceExhausted || !ref.exhausted) throw;
        break;
      }
      const auto& rec = out.first;
      worst = std::max({worst, std::fabs(ref.download_s - rec.download_s), std::fabs(ref.rebuffer_s - rec.rebuffer_s),
                        std::fabs(ref.buffer_s - rec.buffer_s),
                        std::fabs(ref.end_s - (rec.start_s + rec.download_s + rec.wait_s))});
      ++chunks;
      s = out.second;
    }
  }
  return {worst <= 2e-3, fmt("100 sessions, %zu chunks, worst deviation %.3f ms on d, phi, b, t", chunks, worst * 1e3)};
}

// ---- 8: gradients ----

double rel_norm(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0, na = 0, nb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    d += (a[k] - b[k]) * (a[k] - b[k]);
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  return std::sqrt(d / std::max({na, nb, 1e-300}));
}

bool near_kink(const rl::Mlp& net, const rl::Rollout& ro) {
  for (const auto& t : ro.steps) {
    rl::Tape tape;
    rl::forward(net, t.state, &tape);
    for (std::size_t l = 0; l + 1 < net.layers(); ++l)
      for (double z : tape.pre[l])
        if (std::fabs(z) < 1e-3) return true;
  }
  return false;
}

Outcome criterion8() {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g(0.0, 0.3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double h = 1e-5;
  double worst_actor = 0.0, worst_critic = 0.0;
  auto make_rollout = [&](std::size_t len) {
    rl::Rollout ro;
    for (std::size_t m = 0; m < len; ++m) {
      rl::Transition t;
      for (int k = 0; k < 31; ++k) t.state.push_back(2.0 * u(rng) - 1.0);
      t.action = static_cast<std::size_t>(u(rng) * 6.0) % 6;
      t.reward = 45.0 * u(rng) - 5.0;
      ro.steps.push_back(t);
    }
    for (int k = 0; k < 31; ++k) ro.bootstrap_state.push_back(2.0 * u(rng) - 1.0);
    return ro;
  };
  for (int trial = 0; trial < 50; ++trial) {
    auto actor = rl::Mlp::zeros({31, 16, 16, 6}, rl::Head::Softmax);
    auto critic = rl::Mlp::zeros({31, 16, 16, 1}, rl::Head::Linear);
    for (auto& p : actor.params) p = g(rng);
    for (auto& p : critic.params) p = g(rng);
    auto ro = make_rollout(1 + trial % 8);
    while (near_kink(actor, ro) || near_kink(critic, ro)) ro = make_rollout(1 + trial % 8);
    const auto targets = rl::nstep_targets(ro, critic, 0.99, 8);
    std::vector<double> adv;
    for (std::size_t m = 0; m < ro.steps.size(); ++m) adv.push_back(targets[m] - rl::forward_critic(critic, ro.steps[m].state));
    const double phi = 0.5 * u(rng);

    const auto ga = rl::actor_gradient(actor, ro, adv, phi);
    std::vector<double> fa(ga.size());
    for (std::size_t k = 0; k < fa.size(); ++k) {
      auto a = actor, b = actor;
      a.params[k] += h;
      b.params[k] -= h;
      fa[k] = (oracle::actor_objective(a, ro, adv, phi) - oracle::actor_objective(b, ro, adv, phi)) / (2 * h);
    }
    worst_actor = std::max(worst_actor, rel_norm(ga, fa));

    const auto gc = rl::critic_gradient(critic, ro, targets);
    std::vector<double> fc(gc.size());
    for (std::size_t k = 0; k < fc.size(); ++k) {
      auto a = critic, b = critic;
      a.params[k] += h;
      b.params[k] -= h;
      fc[k] = (oracle::critic_loss(a, ro, targets) - oracle::critic_loss(b, ro, targets)) / (2 * h);
    }
    worst_critic = std::max(worst_critic, rel_norm(gc, fc));
  }
  return {worst_actor < 1e-4 && worst_critic < 1e-4,
          fmt("50 cases, worst relative error actor %.2e, critic %.2e", worst_actor, worst_critic)};
}

// ---- 9: constructed environment ----

Outcome criterion9() {
  const auto t0 = Clock::now();
  player::VideoManifest man;
  man.chunk_duration_s = 2.0;
  for (int m = 0; m < 48; ++m) {
    player::Chunk c;
    c.reps = {{1e6, 2e6, 30.0}, {2e6, 4e6, 40.0}};
    c.z = {10.0, 1e-6, 1.0};
    man.chunks.push_back(c);
  }
  // 10 Mbps always carries the 2 Mbps rung
  const tracegen::RateTrace tr{0, std::vector<double>(300, 10e6)};
  const player::PlayerParams pp;
  rl::TrainConfig cfg;
  cfg.episodes = 2000;
  cfg.seed = 9;
  const rl::EnvFactory factory = [&](std::size_t) {
    return std::make_unique<rl::StreamingEnv>(std::vector<rl::Episode>{{&tr, &man}}, pp);
  };
  const auto result = rl::train(factory, cfg);
  const rl::DrlPolicy policy(result.model.actor);
  const auto s = player::run_session(tr, man, policy, pp);
  std::size_t top = 0;
  for (const auto& r : s.records) top += r.action == 1;
  const double frac = static_cast<double>(top) / static_cast<double>(s.records.size());
  const double secs = seconds_since(t0);
  return {frac >= 0.99 && secs < 300.0,
          fmt("top rung on %.1f%% of %zu steps after 2000 episodes, %.1f s", 100.0 * frac, s.records.size(), secs)};
}

// ---- 10 and 11: the streaming pipeline ----

struct Pipeline {
  bool ran = false;
  std::vector<cli::SchemeSummary> summaries;
  cli::RunConfig config;
  double seconds = 0.0;
};

Pipeline& pipeline(const fs::path& work) {
  static Pipeline p;
  if (p.ran) return p;
  const auto t0 = Clock::now();
  auto& c = p.config;
  c.out = (work / "pipeline").string();
  c.duration_s = 120.0;
  c.n_train = 20;
  c.n_test = 20;
  c.seed = 1;
  c.train.episodes = 10000;
  c.train.actor_lr = 1e-4;
  c.train.critic_lr = 1e-3;
  c.train.reward_scale = 0.1;
  fs::remove_all(c.out);
  cli::gen_traces(c);
  cli::train(c);
  p.summaries = cli::evaluate(c);
  p.seconds = seconds_since(t0);
  p.ran = true;
  return p;
}

const cli::SchemeSummary& find(const std::vector<cli::SchemeSummary>& rows, const std::string& name) {
  for (const auto& r : rows)
    if (r.scheme == name) return r;
  throw std::runtime_error("missing scheme " + name);
}

Outcome criterion10(const fs::path& work) {
  const auto& p = pipeline(work);
  const auto& drl = find(p.summaries, "qddra_drl");
  const auto& rb = find(p.summaries, "qddra_rb");
  const auto& bb = find(p.summaries, "qddra_bb");
  const auto& wdrl = find(p.summaries, "wmmse_drl");
  std::string lowest;
  double low = 1e300;
  for (const auto& s : p.summaries)
    if (s.total_unfairness < low) {
      low = s.total_unfairness;
      lowest = s.scheme;
    }
  const bool pass = drl.mean_qoe >= rb.mean_qoe && drl.mean_qoe >= bb.mean_qoe &&
                    drl.total_unfairness <= wdrl.total_unfairness && p.seconds < 2700.0;
  return {pass, fmt("QoE qddra_drl %.3f, qddra_rb %.3f, qddra_bb %.3f; QoE unfairness qddra_drl %.4f vs "
                    "wmmse_drl %.4f (lowest of six: %s); %.0f s",
                    drl.mean_qoe, rb.mean_qoe, bb.mean_qoe, drl.total_unfairness, wdrl.total_unfairness,
                    lowest.c_str(), p.seconds)};
}

Outcome criterion11(const fs::path& work) {
  const auto& p = pipeline(work);
  const auto& c = p.config;
  const cli::Paths paths{c.out};
  const auto profiles = cli::user_profiles(c);
  const abr::BufferBased bb(c.reservoir_s, c.cushion_s);
  const auto pp = cli::player_params(c);
  std::size_t eligible = 0, sessions = 0, stalled = 0;
  auto check = [&](const tracegen::RateTrace& tr, const player::VideoManifest& m) {
    ++sessions;
    double lowest = 0.0;
    for (const auto& ch : m.chunks) lowest = std::max(lowest, ch.reps[0].size_bits / m.chunk_duration_s);
    if (*std::min_element(tr.rate_bps.begin(), tr.rate_bps.end()) <= lowest) return;
    ++eligible;
    const auto s = player::run_session(tr, m, bb, pp);
    for (std::size_t k = 1; k < s.records.size(); ++k)
      if (s.records[k].rebuffer_s > 0.0) {
        ++stalled;
        break;
      }
  };
  for (auto mode : {beamform::Mode::Qddra, beamform::Mode::Wmmse}) {
    const auto split = tracegen::read_split(paths.traces(mode) / "split.txt");
    std::vector<player::VideoManifest> videos;
    for (const auto& prof : profiles) videos.push_back(player::read_manifest(paths.videos() / (prof.name + ".json")));
    for (const auto& f : split.test)
      for (const auto& tr : tracegen::read_trace(f)) check(tr, videos.at(tr.user));
  }
  const std::size_t from_pipeline = eligible;
  // synthetic traces hovering just above the floor keep the check non-vacuous
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const auto m = player::synth_manifest(player::default_profiles(1e6, 48, 300 + t)[t % 3]);
    double lowest = 0.0;
    for (const auto& ch : m.chunks) lowest = std::max(lowest, ch.reps[0].size_bits / m.chunk_duration_s);
    tracegen::RateTrace tr{0, {}};
    for (int k = 0; k < 400; ++k) tr.rate_bps.push_back(lowest * (1.0 + 1e-6 + 6.0 * u(rng) * u(rng)));
    check(tr, m);
  }
  return {stalled == 0 && eligible > 0,
          fmt("%zu eligible sessions (%zu from pipeline test traces, %zu sessions examined), %zu with a stall after "
              "chunk 0",
              eligible, from_pipeline, sessions, stalled)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  bool strict = false;
  std::string only;
  std::string work = (fs::temp_directory_path() / "qdsim_acceptance").string();
  app.add_flag("--strict", strict, "exit nonzero when any criterion fails");
  app.add_option("--only", only, "comma-separated criterion numbers");
  app.add_option("--work", work, "scratch directory for the pipeline run");
  CLI11_PARSE(app, argc, argv);

  std::set<int> selected;
  std::stringstream ss(only);
  for (std::string item; std::getline(ss, item, ',');) selected.insert(std::stoi(item));

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, criterion1},
      {2, criterion2},
      {3, criterion3},
      {4, criterion4},
      {5, criterion5},
      {6, criterion6},
      {7, criterion7},
      {8, criterion8},
      {9, criterion9},
      {10, [&] { return criterion10(work); }},
      {11, [&] { return criterion11(work); }},
  };
  std::ofstream report("acceptance_report.txt");
  int failed = 0;
  int crashed = 0;
  for (const auto& [id, run] : criteria) {
    if (!selected.empty() && !selected.count(id)) continue;
    std::string line;
    try {
      const auto o = run();
      line = fmt("criterion %2d: %s  %s", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
      if (!o.pass) ++failed;
    } catch (const std::exception& e) {
      line = fmt("criterion %2d: FAIL  error: %s", id, e.what());
      ++failed;
      ++crashed;
    }
    std::cout << line << std::endl;
    report << line << '\n';
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << '\n';
  if (crashed) return 2;
  return strict && failed ? 1 : 0;
}
