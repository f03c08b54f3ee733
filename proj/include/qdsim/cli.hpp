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

/// Experiment orchestration: run configuration, the gen-traces / train /
/// evaluate / report commands, and fairness metrics.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qdsim/beamform.hpp"
#include "qdsim/player.hpp"
#include "qdsim/rl.hpp"
#include "qdsim/tracegen.hpp"

namespace qdsim::cli {

struct RunConfig {
  // [channel]
  double power_budget_w = 4.0;
  double bandwidth_hz = 1e6;
  double noise_power = 1.0;
  double snr_gap = 1.34;
  double doppler_hz = 10.0;
  double slot_s = 0.04;
  double pathloss_exponent = 3.0;
  double shadowing_sigma_db = 8.0;
  double ref_gain_db = 30.0;
  double walking_speed = 1.4;
  double move_period_s = 5.0;
  double radius_m = 100.0;
  double min_radius_m = 10.0;
  // [solver]
  double solver_tol = 1e-4;
  int solver_max_iter = 100;
  std::size_t cadence = 1;
  double beta = 0.1;
  double quality_floor = 1e-3;
  // [video]
  std::size_t chunks = 48;
  double chunk_duration_s = 2.0;
  double complexity_jitter = 0.15;
  std::uint64_t video_seed = 7;
  std::string single_cell_video = "documentary";
  // [player]
  double buffer_max_s = 30.0;
  double switch_penalty = 0.5;
  double rebuffer_penalty = 4.0;
  std::size_t history = 8;
  // [abr]
  double reservoir_s = 5.0;
  double cushion_s = 20.0;
  // [rl]
  rl::TrainConfig train;
  std::string resume;  // checkpoint to continue from, empty for a fresh start
  // [run]
  std::string scenario = "single_cell_siso";
  std::string scheme = "all";
  std::uint64_t seed = 1;
  std::string out = "run";
  double duration_s = 300.0;
  std::size_t n_train = 100;
  std::size_t n_test = 100;
  std::size_t chunk_trace = 0;   // test trace whose chunk-by-chunk records are written
  double psnr_offset_db = 25.0;  // subtracted from quality in printed tables only

  /// Throws ConfigInvalid.
  void validate() const;
};

/// Section/key INI. Unknown keys and unparseable values throw ConfigInvalid.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_string(const std::string& text);
std::string dump_config(const RunConfig& config);

struct Scheme {
  beamform::Mode mode = beamform::Mode::Qddra;
  enum class Abr { Drl, Rb, Bb } abr = Abr::Drl;

  std::string name() const;  // e.g. "qddra_drl"
};

/// "all" gives the six pairs. Throws ConfigInvalid.
std::vector<Scheme> parse_schemes(const std::string& text);
std::string mode_name(beamform::Mode mode);

channel::Topology scenario_topology(const RunConfig& config);
/// Video profile per user: one shared profile in the single-cell scenario,
/// profiles rotating within each cell in the multicell one.
std::vector<player::VideoProfile> user_profiles(const RunConfig& config);
tracegen::Scenario make_scenario(const RunConfig& config, beamform::Mode mode,
                                 const std::vector<player::VideoManifest>& videos);
player::PlayerParams player_params(const RunConfig& config);

struct Fairness {
  double jain = 1.0;
  double unfairness = 0.0;  // sqrt(1 − J)
};

/// J = (Σx)² / (n Σx²). Throws EmptyOrAllZero, ConfigInvalid on a negative entry.
Fairness jain_fairness(std::span<const double> xs);
/// Mean over cells of the unfairness among that cell's users.
double intra_cell_unfairness(std::span<const double> per_user, const channel::Topology& topology);
double total_unfairness(std::span<const double> per_user);

/// Per-user time-averaged rate of one trace set, then its unfairness.
double rate_unfairness(const std::vector<tracegen::RateTrace>& traces);

struct SchemeSummary {
  std::string scheme;
  double mean_qoe = 0.0;
  double mean_quality_db = 0.0;
  double mean_abs_switch_db = 0.0;
  double mean_rebuffer_s = 0.0;
  double intra_cell_unfairness = 0.0;
  double total_unfairness = 0.0;
};

/// Layout under config.out.
struct Paths {
  std::filesystem::path root;
  std::filesystem::path traces(beamform::Mode mode) const;
  std::filesystem::path videos() const;
  std::filesystem::path model(beamform::Mode mode) const;
  std::filesystem::path eval(const Scheme& scheme) const;
  std::filesystem::path report() const;
};

void gen_traces(const RunConfig& config);
void train(const RunConfig& config);
/// Throws MissingArtifacts when traces, videos or a needed checkpoint are absent.
std::vector<SchemeSummary> evaluate(const RunConfig& config);
std::vector<SchemeSummary> report(const RunConfig& config);

/// Entry point of the command-line tool; returns the process exit code.
int run_main(int argc, char** argv);

}  // namespace qdsim::cli
