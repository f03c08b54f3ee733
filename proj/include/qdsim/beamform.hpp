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

/// Per-slot transmit/receive beamforming for the multi-cell MIMO downlink.
///
/// Both solvers are block coordinate descent on a weighted sum-MSE
/// surrogate: receivers u (MMSE), per-user weights w, then transmitters v
/// with one Lagrange multiplier per cell for the power budget.
///
///  - Qddra: w = c′(e) with c the rate-to-quality cost, users weighted by
///    α = 1/Q (long-term average quality).
///  - Wmmse: w = 1/e, the classic sum-rate weights.
///
/// The SNR gap Γ is folded into each user's own link (G = H/√Γ) so that the
/// MMSE error of that link satisfies −ln e = ln(1 + SINR/Γ) exactly, with
/// interference still seen through the true channel.

#include <cstddef>
#include <span>
#include <vector>

#include "qdsim/channel.hpp"
#include "qdsim/numerics.hpp"
#include "qdsim/quality.hpp"

namespace qdsim::beamform {

using numerics::CMatrix;

enum class Mode { Qddra, Wmmse };

struct SlotProblem {
  const channel::Topology* topology = nullptr;  // not owned
  channel::ChannelSnapshot snapshot;
  std::vector<double> weights;              // α per user, > 0
  std::vector<quality::RQParams> rq;        // z per user (bit/s units)
  double snr_gap = 1.34;                    // Γ ≥ 1
  double bandwidth_hz = 1e6;

  std::size_t num_users() const { return topology->num_users(); }
  std::size_t cell_of(std::size_t user) const { return topology->users[user].cell; }
  /// H(user, cell)
  const CMatrix& h(std::size_t user, std::size_t cell) const { return snapshot.h(user, cell); }
  double noise() const { return snapshot.noise_power; }
  void validate() const;
};

using Beams = std::vector<CVector>;

struct BeamformerSet {
  Beams v;                 // transmit, length N_ta of the home cell
  Beams u;                 // receive, length N_ra
  std::vector<double> w;   // MSE weights
  std::vector<double> e;   // MSE
};

struct StopRule {
  double tol = 1e-4;   // relative objective improvement
  int max_iter = 100;
};

struct SlotResult {
  BeamformerSet beams;
  std::vector<double> rate_bps;
  std::vector<double> quality_db;
  int iterations = 0;
  std::vector<double> objective;  // one entry per completed u→w→v cycle, plus the start
  std::vector<double> max_power_violation;  // max_k (Σ‖v‖² − P_k) after each cycle
  int backtracks = 0;             // safeguard steps taken (only possible when c is not concave)
};

/// Starting point: ‖v‖² = P_k / I_k along the dominant right singular vector of the direct channel.
Beams initial_transmit(const SlotProblem& problem);

/// MMSE receive vector of one user for transmitters v.
CVector mmse_receiver(const SlotProblem& problem, const Beams& v, std::size_t user);
Beams mmse_receivers(const SlotProblem& problem, const Beams& v);         // OpenMP over users
Beams mmse_receivers_serial(const SlotProblem& problem, const Beams& v);  // reference

/// General MSE |1 − uᴴGv|² + Σ_others |uᴴH′v′|² + σ²‖u‖².
double mse(const SlotProblem& problem, const Beams& v, std::size_t user, std::span<const cplx> u);
/// 1 − uᴴGv, the closed form valid for the MMSE receiver.
double mse_mmse_form(const SlotProblem& problem, const Beams& v, std::size_t user, std::span<const cplx> u);

/// z in nat-per-Hz units (see quality::to_nat_units). Throws MseOutOfRange.
double weight_update(double mse, const quality::RQParams& z_nat, Mode mode);

struct TransmitUpdate {
  Beams v;
  std::vector<double> mu;  // per cell multiplier
};

TransmitUpdate transmit_update(const SlotProblem& problem, const Beams& u, std::span<const double> w);
TransmitUpdate transmit_update_serial(const SlotProblem& problem, const Beams& u, std::span<const double> w);

/// Σ_{i in cell k} ‖v_i‖² per cell.
std::vector<double> cell_powers(const SlotProblem& problem, const Beams& v);

/// B · log₂ det(I + SINR/Γ) in bit/s, straight from the covariance matrices.
double rate(const SlotProblem& problem, const Beams& v, std::size_t user);

/// Weighted utility evaluated at v with MMSE receivers: Σ α q (Qddra) or Σ α R (Wmmse).
double objective(const SlotProblem& problem, const Beams& v, Mode mode);

SlotResult solve_slot(const SlotProblem& problem, Beams v_init, Mode mode, StopRule stop = {});

/// Q = β q + (1 − β) Q_prev
double update_avg_quality(double q_prev, double q, double beta);

}  // namespace qdsim::beamform
