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

/// Actor-critic bitrate adaptation trained with parallel advantage
/// actor-critic workers. Networks are small dense perceptrons with all
/// parameters in one flat vector so updates can be applied as a unit.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdsim/abr.hpp"
#include "qdsim/numerics.hpp"
#include "qdsim/player.hpp"

namespace qdsim::rl {

/// Layout tag stored with every checkpoint. Coordinates, in order:
/// throughput[n]·1e-6, download_time[n]/10, next_quality[L]/60,
/// next_size[L]·1e-6/T_chunk, buffer/b_max, remaining/total_chunks, last_quality/60.
inline constexpr const char* kStateEncoding = "qdsim-state/1 thr,dl,q,size,buf,rem,last";

std::size_t state_dim(std::size_t history, std::size_t reps);
std::vector<double> encode_state(const abr::Observation& obs);

enum class Head { Softmax, Linear };

inline constexpr double kLeakySlope = 0.01;

struct Mlp {
  std::vector<std::size_t> sizes;  // input, hidden..., output
  Head head = Head::Linear;
  std::vector<double> params;      // per layer: W (out × in, row-major), then b

  static Mlp zeros(std::vector<std::size_t> sizes, Head head);
  /// He-uniform hidden layers; output layer scaled down so the initial
  /// policy is close to uniform and the initial value close to zero.
  static Mlp random(std::vector<std::size_t> sizes, Head head, Rng& rng);

  std::size_t layers() const noexcept { return sizes.size() - 1; }
  std::size_t weight_offset(std::size_t layer) const;
  std::size_t bias_offset(std::size_t layer) const;
  std::size_t num_params() const;
  /// Throws ShapeMismatch.
  void validate() const;
};

/// Pre-activations of every layer, kept for the backward pass.
struct Tape {
  std::vector<std::vector<double>> inputs;  // input to each layer
  std::vector<std::vector<double>> pre;     // affine output of each layer
};

/// Raw network output (logits or value). Throws ShapeMismatch.
std::vector<double> forward(const Mlp& net, std::span<const double> x, Tape* tape = nullptr);
/// grad += ∂(doutᵀ output)/∂params for the pass recorded in tape.
void backward(const Mlp& net, const Tape& tape, std::span<const double> dout, std::span<double> grad);

std::vector<double> softmax(std::span<const double> logits);
std::vector<double> forward_actor(const Mlp& actor, std::span<const double> state);
double forward_critic(const Mlp& critic, std::span<const double> state);
/// −Σ π log π
double entropy(std::span<const double> probs);

struct Transition {
  std::vector<double> state;
  std::size_t action = 0;
  double reward = 0.0;
  bool terminal = false;  // episode ended with this step
};

struct Rollout {
  std::vector<Transition> steps;
  /// state after the last step; unused when that step is terminal
  std::vector<double> bootstrap_state;
};

/// Σ_{j<k} γʲ r_{m+j} + γᵏ V(s_{m+k}) with k = min(n, steps to the rollout end),
/// the bootstrap term dropped once a terminal step is inside the window.
std::vector<double> nstep_targets(const Rollout& rollout, const Mlp& critic, double gamma, std::size_t n);
/// targets − V(s_m)
std::vector<double> advantages(const Rollout& rollout, const Mlp& critic, double gamma, std::size_t n);

/// Σ_m (target_m − V(s_m))² with the targets held fixed.
double critic_loss(const Mlp& critic, const Rollout& rollout, std::span<const double> targets);
std::vector<double> critic_gradient(const Mlp& critic, const Rollout& rollout, std::span<const double> targets);
/// θ_v ← θ_v − lr · ∇ critic_loss
void critic_step(Mlp& critic, const Rollout& rollout, std::span<const double> targets, double lr);

/// Σ_m [A_m log π(a_m|s_m) + φ h(π(·|s_m))] with A held fixed.
double actor_objective(const Mlp& actor, const Rollout& rollout, std::span<const double> adv, double entropy_coef);
std::vector<double> actor_gradient(const Mlp& actor, const Rollout& rollout, std::span<const double> adv,
                                   double entropy_coef);
/// θ ← θ + lr · ∇ actor_objective
void actor_step(Mlp& actor, const Rollout& rollout, std::span<const double> adv, double lr, double entropy_coef);

struct StepOutcome {
  abr::Observation obs;
  double reward = 0.0;
  bool done = false;
};

class Env {
 public:
  virtual ~Env() = default;
  virtual abr::Observation reset(Rng& rng) = 0;
  /// nullopt when the episode ended before the action could complete
  virtual std::optional<StepOutcome> step(std::size_t action) = 0;
  virtual std::size_t num_actions() const = 0;
  virtual std::size_t state_size() const = 0;
};

using EnvFactory = std::function<std::unique_ptr<Env>(std::size_t worker)>;

/// One (trace, video) pairing to stream.
struct Episode {
  const tracegen::RateTrace* trace = nullptr;
  const player::VideoManifest* manifest = nullptr;
};

/// Streams a uniformly drawn episode per reset; reward is the chunk QoE.
class StreamingEnv final : public Env {
 public:
  StreamingEnv(std::vector<Episode> episodes, player::PlayerParams params);

  abr::Observation reset(Rng& rng) override;
  std::optional<StepOutcome> step(std::size_t action) override;
  std::size_t num_actions() const override;
  std::size_t state_size() const override;

 private:
  std::vector<Episode> episodes_;
  player::PlayerParams params_;
  Episode current_;
  player::SessionState state_;
};

enum class Optimizer { Sgd, RmsProp };

struct TrainConfig {
  double actor_lr = 1e-5;
  double critic_lr = 1e-4;
  double gamma = 0.99;
  double entropy_start = 0.5;
  double entropy_end = 0.01;
  std::size_t rollout = 8;
  std::size_t workers = 1;
  std::size_t episodes = 10000;
  std::vector<std::size_t> hidden{64, 64};
  std::uint64_t seed = 1;
  /// rewards are multiplied by this before entering the updates
  double reward_scale = 1.0;
  /// Sgd applies lr · gradient as is; RmsProp divides each coordinate by
  /// the root of a shared running mean of its squared gradient.
  Optimizer optimizer = Optimizer::RmsProp;
  double rms_decay = 0.99;
  double rms_epsilon = 1e-8;
  /// run the workers' episodes interleaved on the calling thread
  bool serial = false;

  void validate() const;
  double entropy_at(std::size_t episode) const;
};

struct CurvePoint {
  std::size_t episode = 0;
  double mean_qoe = 0.0;
  double entropy_coef = 0.0;
};

struct Model {
  Mlp actor;
  Mlp critic;
  std::size_t episodes_done = 0;
  // running mean squared gradients (RmsProp), empty until first used
  std::vector<double> actor_sq;
  std::vector<double> critic_sq;
};

struct TrainResult {
  Model model;
  std::vector<CurvePoint> curve;
};

/// Continues from `start` when given, otherwise initializes from config.seed.
TrainResult train(const EnvFactory& factory, const TrainConfig& config, const Model* start = nullptr);

/// Greedy (argmax) policy of a trained actor.
class DrlPolicy final : public abr::Policy {
 public:
  explicit DrlPolicy(Mlp actor);
  std::size_t decide(const abr::Observation& obs) const override;
  const Mlp& actor() const noexcept { return actor_; }

 private:
  Mlp actor_;
};

void write_checkpoint(const Model& model, const std::filesystem::path& path);
/// Throws Io, Malformed (also on an unknown state encoding).
Model read_checkpoint(const std::filesystem::path& path);

void write_curve_csv(const std::vector<CurvePoint>& curve, const std::filesystem::path& path);

}  // namespace qdsim::rl
