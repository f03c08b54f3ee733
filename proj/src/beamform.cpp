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

#include "qdsim/beamform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "qdsim/error.hpp"

namespace qdsim::beamform {

using numerics::add_diagonal;
using numerics::add_outer;

using numerics::Cholesky;
using numerics::dot;
using numerics::norm2;

void SlotProblem::validate() const {
  if (topology == nullptr) throw Error(Errc::ConfigInvalid, "slot problem without topology");
  const std::size_t n = topology->num_users();
  if (snapshot.num_cells != topology->num_cells() || snapshot.num_users() != n)
    throw Error(Errc::ShapeMismatch, "snapshot does not match topology");
  if (weights.size() != n || rq.size() != n) throw Error(Errc::ShapeMismatch, "per-user parameter count mismatch");
  for (double a : weights)
    if (!(a > 0.0) || !std::isfinite(a)) throw Error(Errc::ConfigInvalid, "user weights must be positive");
  if (!(snr_gap >= 1.0)) throw Error(Errc::ConfigInvalid, "SNR gap must be >= 1");
  if (!(bandwidth_hz > 0.0)) throw Error(Errc::ConfigInvalid, "bandwidth must be positive");
  if (!(snapshot.noise_power > 0.0)) throw Error(Errc::ConfigInvalid, "noise power must be positive");
}

namespace {

double own_link_scale(const SlotProblem& p) { return 1.0 / std::sqrt(p.snr_gap); }

// H(user, cell of j) v_j, with the own link attenuated by 1/√Γ
CVector received_component(const SlotProblem& p, const Beams& v, std::size_t user, std::size_t j) {
  CVector y = numerics::matvec(p.h(user, p.cell_of(j)), v[j]);
  if (j == user) {
    const double s = own_link_scale(p);
    for (auto& x : y) x *= s;
  }
  return y;
}

Beams receivers_impl(const SlotProblem& p, const Beams& v, bool parallel) {
  const auto n = static_cast<std::ptrdiff_t>(p.num_users());
  Beams u(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static) if (parallel && n >= 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = mmse_receiver(p, v, static_cast<std::size_t>(i));
  return u;
}

double clamp_mse(double e) { return std::clamp(e, std::numeric_limits<double>::min(), 1.0); }

// Σ α q or Σ α R from per-user MSEs at MMSE receivers.
double utility_from_mse(const SlotProblem& p, std::span<const double> e, Mode mode) {
  double acc = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double nats = -std::log(clamp_mse(e[i]));
    if (mode == Mode::Qddra) {
      const auto z = quality::to_nat_units(p.rq[i], p.bandwidth_hz);
      acc += p.weights[i] * quality::quality_of_rate(nats, z);
    } else {
      acc += p.weights[i] * p.bandwidth_hz * nats / std::numbers::ln2;
    }
  }
  return acc;
}

std::vector<double> mses(const SlotProblem& p, const Beams& v, const Beams& u) {
  std::vector<double> e(p.num_users());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = clamp_mse(mse(p, v, i, u[i]));
  return e;
}

struct CellSolve {
  std::vector<std::size_t> users;
  std::vector<CMatrix> quad;  // A_i per user in the cell
  std::vector<CVector> rhs;   // b_i
};

CellSolve build_cell_system(const SlotProblem& p, std::size_t cell, const Beams& u, std::span<const double> w) {
  const std::size_t ntx = p.topology->cells[cell].tx_antennas;
  CMatrix shared(ntx, ntx);
  std::vector<CVector> back(p.num_users());
  for (std::size_t j = 0; j < p.num_users(); ++j) {
    back[j] = numerics::matvec_adjoint(p.h(j, cell), u[j]);  // H(j,k)ᴴ u_j
    add_outer(shared, back[j], p.weights[j] * w[j]);
  }
  CellSolve cs;
  const double s = own_link_scale(p);
  for (std::size_t i = 0; i < p.num_users(); ++i) {
    if (p.cell_of(i) != cell) continue;
    CMatrix a = shared;
    // own term uses G = H/√Γ: replace α w hhᴴ by α w hhᴴ/Γ
    add_outer(a, back[i], -p.weights[i] * w[i] * (1.0 - 1.0 / p.snr_gap));
    cs.users.push_back(i);
    cs.quad.push_back(std::move(a));
    cs.rhs.push_back(numerics::scaled(back[i], p.weights[i] * w[i] * s));
  }
  return cs;
}

// v_i(μ) for every user in the cell; nullopt when A + μI is not positive definite.
std::optional<Beams> cell_beams(const CellSolve& cs, double mu) {
  Beams out;
  out.reserve(cs.users.size());
  for (std::size_t n = 0; n < cs.users.size(); ++n) {
    CMatrix a = cs.quad[n];
    add_diagonal(a, mu);
    try {
      out.push_back(Cholesky(a).solve(cs.rhs[n]));
    } catch (const Error& err) {
      if (err.code() == Errc::NotPositiveDefinite) return std::nullopt;
      throw;
    }
  }
  return out;
}

double total_power(const Beams& beams) {
  double acc = 0.0;
  for (const auto& b : beams) acc += norm2(b);
  return acc;
}

void solve_cell(const SlotProblem& p, std::size_t cell, const Beams& u, std::span<const double> w, Beams& v_out,
                double& mu_out) {
  const CellSolve cs = build_cell_system(p, cell, u, w);
  const double budget = p.topology->cells[cell].power_budget;
  double rhs_energy = 0.0;
  for (const auto& b : cs.rhs) rhs_energy += norm2(b);

  Beams beams;
  double mu = 0.0;
  if (rhs_energy == 0.0) {
    for (std::size_t n = 0; n < cs.users.size(); ++n) beams.emplace_back(cs.rhs[n].size(), cplx{0.0, 0.0});
  } else if (auto free = cell_beams(cs, 0.0); free && total_power(*free) <= budget) {
    beams = std::move(*free);
  } else {
    // ‖(A + μI)⁻¹ b‖ ≤ ‖b‖ / μ, so this μ already satisfies the budget
    double hi = std::sqrt(rhs_energy / budget);
    const auto residual = [&](double m) {
      const auto b = cell_beams(cs, m);
      return b ? total_power(*b) - budget : std::numeric_limits<double>::infinity();
    };
    while (residual(hi) > 0.0) hi *= 2.0;
    try {
      mu = numerics::bisect(residual, 0.0, hi, 1e-12 * budget);
    } catch (const Error& err) {
      throw Error(Errc::BisectionFailure, std::string("power multiplier search failed: ") + err.what());
    }
    auto b = cell_beams(cs, mu);
    if (!b) throw Error(Errc::BisectionFailure, "power multiplier landed on a singular system");
    beams = std::move(*b);
    // the constraint is active at μ* > 0: land exactly on the budget
    const double pw = total_power(beams);
    if (pw > 0.0) {
      const double s = std::sqrt(budget / pw);
      for (auto& x : beams)
        for (auto& c : x) c *= s;
    }
  }
  for (std::size_t n = 0; n < cs.users.size(); ++n) v_out[cs.users[n]] = std::move(beams[n]);
  mu_out = mu;
}

TransmitUpdate transmit_impl(const SlotProblem& p, const Beams& u, std::span<const double> w, bool parallel) {
  const auto cells = static_cast<std::ptrdiff_t>(p.topology->num_cells());
  TransmitUpdate out;
  out.v.resize(p.num_users());
  out.mu.assign(static_cast<std::size_t>(cells), 0.0);
  // Each cell writes only its own users' entries of out.v.
#pragma omp parallel for schedule(dynamic) if (parallel && cells >= 4)
  for (std::ptrdiff_t k = 0; k < cells; ++k)
    solve_cell(p, static_cast<std::size_t>(k), u, w, out.v, out.mu[static_cast<std::size_t>(k)]);
  return out;
}

Beams blend(const Beams& from, const Beams& to, double t) {
  Beams out = from;
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t a = 0; a < out[i].size(); ++a) out[i][a] += t * (to[i][a] - from[i][a]);
  return out;
}

double max_violation(const SlotProblem& p, const Beams& v) {
  const auto pw = cell_powers(p, v);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < pw.size(); ++k) worst = std::max(worst, pw[k] - p.topology->cells[k].power_budget);
  return worst;
}

}  // namespace

Beams initial_transmit(const SlotProblem& p) {
  constexpr int kPowerIterations = 20;
  Beams v(p.num_users());
  for (std::size_t i = 0; i < p.num_users(); ++i) {
    const std::size_t k = p.cell_of(i);
    const CMatrix& h = p.h(i, k);
    const std::size_t ntx = h.cols();
    CVector x(ntx, cplx{1.0 / std::sqrt(static_cast<double>(ntx)), 0.0});
    for (int it = 0; it < kPowerIterations; ++it) {
      CVector y = numerics::matvec_adjoint(h, numerics::matvec(h, x));
      const double nrm = std::sqrt(norm2(y));
      if (nrm == 0.0) break;
      for (auto& c : y) c /= nrm;
      x = std::move(y);
    }
    const double share = p.topology->cells[k].power_budget /
                         static_cast<double>(p.topology->users_in_cell(k).size());
    const double scale = std::sqrt(share / norm2(x));
    for (auto& c : x) c *= scale;
    v[i] = std::move(x);
  }
  return v;
}

CVector mmse_receiver(const SlotProblem& p, const Beams& v, std::size_t user) {
  const std::size_t nrx = p.topology->users[user].rx_antennas;
  CMatrix cov(nrx, nrx);
  CVector own;
  for (std::size_t j = 0; j < p.num_users(); ++j) {
    CVector y = received_component(p, v, user, j);
    add_outer(cov, y);
    if (j == user) own = std::move(y);
  }
  add_diagonal(cov, p.noise());
  return numerics::solve_hpd(cov, own);
}

Beams mmse_receivers(const SlotProblem& p, const Beams& v) { return receivers_impl(p, v, true); }

Beams mmse_receivers_serial(const SlotProblem& p, const Beams& v) { return receivers_impl(p, v, false); }

double mse(const SlotProblem& p, const Beams& v, std::size_t user, std::span<const cplx> u) {
  double acc = p.noise() * norm2(u);
  for (std::size_t j = 0; j < p.num_users(); ++j) {
    const CVector y = received_component(p, v, user, j);
    const cplx g = dot(u, y);
    acc += j == user ? std::norm(1.0 - g) : std::norm(g);
  }
  return acc;
}

double mse_mmse_form(const SlotProblem& p, const Beams& v, std::size_t user, std::span<const cplx> u) {
  const CVector y = received_component(p, v, user, user);
  return 1.0 - dot(u, y).real();
}

double weight_update(double e, const quality::RQParams& z_nat, Mode mode) {
  if (mode == Mode::Qddra) return quality::cost_deriv(e, z_nat);
  if (!(e > 0.0) || e > 1.0) throw Error(Errc::MseOutOfRange, "MSE outside (0, 1]");
  return 1.0 / e;
}

TransmitUpdate transmit_update(const SlotProblem& p, const Beams& u, std::span<const double> w) {
  return transmit_impl(p, u, w, true);
}

TransmitUpdate transmit_update_serial(const SlotProblem& p, const Beams& u, std::span<const double> w) {
  return transmit_impl(p, u, w, false);
}

std::vector<double> cell_powers(const SlotProblem& p, const Beams& v) {
  std::vector<double> out(p.topology->num_cells(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) out[p.cell_of(i)] += norm2(v[i]);
  return out;
}

double rate(const SlotProblem& p, const Beams& v, std::size_t user) {
  const std::size_t nrx = p.topology->users[user].rx_antennas;
  CMatrix theta(nrx, nrx);
  for (std::size_t j = 0; j < p.num_users(); ++j) {
    if (j == user) continue;
    add_outer(theta, numerics::matvec(p.h(user, p.cell_of(j)), v[j]));
  }
  add_diagonal(theta, p.noise());
  CMatrix with_signal = theta;
  add_outer(with_signal, numerics::matvec(p.h(user, p.cell_of(user)), v[user]), 1.0 / p.snr_gap);
  const double nats = numerics::logdet_hpd(with_signal) - numerics::logdet_hpd(theta);
  return std::max(0.0, p.bandwidth_hz * nats / std::numbers::ln2);
}

double objective(const SlotProblem& p, const Beams& v, Mode mode) {
  const Beams u = mmse_receivers(p, v);
  return utility_from_mse(p, mses(p, v, u), mode);
}

namespace {

// drops smaller than this are floating-point noise around a fixed point
constexpr double kRoundingSlack = 1e-10;

}  // namespace

SlotResult solve_slot(const SlotProblem& p, Beams v, Mode mode, StopRule stop) {
  p.validate();
  if (v.size() != p.num_users()) throw Error(Errc::ShapeMismatch, "initial beams do not match user count");

  std::vector<quality::RQParams> z_nat(p.num_users());
  for (std::size_t i = 0; i < z_nat.size(); ++i) z_nat[i] = quality::to_nat_units(p.rq[i], p.bandwidth_hz);

  SlotResult res;
  Beams u = mmse_receivers(p, v);
  std::vector<double> e = mses(p, v, u);
  double obj = utility_from_mse(p, e, mode);
  res.objective.push_back(obj);
  res.max_power_violation.push_back(max_violation(p, v));

  std::vector<double> w(p.num_users());
  for (int it = 0; it < stop.max_iter; ++it) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = weight_update(e[i], z_nat[i], mode);
    Beams v_new = transmit_update(p, u, w).v;
    Beams u_new = mmse_receivers(p, v_new);
    std::vector<double> e_new = mses(p, v_new, u_new);
    double obj_new = utility_from_mse(p, e_new, mode);

    // With a non-concave cost the surrogate step can overshoot; walk back
    // along the (feasible) segment towards the previous iterate.
    bool stalled = false;
    if (obj_new < obj - kRoundingSlack * std::fabs(obj)) {
      double t = 1.0;
      bool found = false;
      for (int half = 0; half < 40 && !found; ++half) {
        t *= 0.5;
        ++res.backtracks;
        Beams v_try = blend(v, v_new, t);
        Beams u_try = mmse_receivers(p, v_try);
        std::vector<double> e_try = mses(p, v_try, u_try);
        const double obj_try = utility_from_mse(p, e_try, mode);
        if (obj_try >= obj) {
          v_new = std::move(v_try);
          u_new = std::move(u_try);
          e_new = std::move(e_try);
          obj_new = obj_try;
          found = true;
        }
      }
      if (!found) {
        v_new = v;
        u_new = u;
        e_new = e;
        obj_new = obj;
        stalled = true;
      }
    }

    const double gain = obj_new - obj;
    v = std::move(v_new);
    u = std::move(u_new);
    e = std::move(e_new);
    obj = obj_new;
    res.iterations = it + 1;
    res.objective.push_back(obj);
    res.max_power_violation.push_back(max_violation(p, v));
    if (stalled || gain < stop.tol * std::fabs(obj)) break;
  }

  for (std::size_t i = 0; i < w.size(); ++i) w[i] = weight_update(e[i], z_nat[i], mode);
  res.beams.v = std::move(v);
  res.beams.u = std::move(u);
  res.beams.w = std::move(w);
  res.beams.e = std::move(e);
  for (std::size_t i = 0; i < p.num_users(); ++i) {
    const double r = rate(p, res.beams.v, i);
    res.rate_bps.push_back(r);
    res.quality_db.push_back(quality::quality_of_rate(r, p.rq[i]));
  }
  return res;
}

double update_avg_quality(double q_prev, double q, double beta) { return beta * q + (1.0 - beta) * q_prev; }

}  // namespace qdsim::beamform
