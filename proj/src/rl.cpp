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

#include "qdsim/rl.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>

#include <json.hpp>

#include "qdsim/error.hpp"

namespace qdsim::rl {

namespace fs = std::filesystem;
using nlohmann::json;

std::size_t state_dim(std::size_t history, std::size_t reps) { return 2 * history + 2 * reps + 3; }

std::vector<double> encode_state(const abr::Observation& obs) {
  std::vector<double> s;
  s.reserve(state_dim(obs.throughput_bps.size(), obs.num_reps()));
  for (double c : obs.throughput_bps) s.push_back(c * 1e-6);
  for (double d : obs.download_time_s) s.push_back(d / 10.0);
  for (double q : obs.next_quality_db) s.push_back(q / 60.0);
  for (double z : obs.next_size_bits) s.push_back(z * 1e-6 / obs.chunk_duration_s);
  s.push_back(obs.buffer_s / obs.buffer_max_s);
  s.push_back(obs.total_chunks == 0 ? 0.0
                                    : static_cast<double>(obs.remaining_chunks) / static_cast<double>(obs.total_chunks));
  s.push_back(obs.last_quality_db / 60.0);
  return s;
}

// ---- networks ----

namespace {

void check_sizes(const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) throw Error(Errc::ShapeMismatch, "network needs an input and an output layer");
  for (std::size_t s : sizes)
    if (s == 0) throw Error(Errc::ShapeMismatch, "layer of width zero");
}

std::size_t count_params(const std::vector<std::size_t>& sizes) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) n += sizes[l + 1] * (sizes[l] + 1);
  return n;
}

double leaky(double x) { return x > 0.0 ? x : kLeakySlope * x; }
double leaky_slope(double x) { return x > 0.0 ? 1.0 : kLeakySlope; }

}  // namespace

Mlp Mlp::zeros(std::vector<std::size_t> sizes, Head head) {
  check_sizes(sizes);
  Mlp net;
  net.sizes = std::move(sizes);
  net.head = head;
  net.params.assign(count_params(net.sizes), 0.0);
  return net;
}

Mlp Mlp::random(std::vector<std::size_t> sizes, Head head, Rng& rng) {
  Mlp net = zeros(std::move(sizes), head);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (std::size_t l = 0; l < net.layers(); ++l) {
    const double fan_in = static_cast<double>(net.sizes[l]);
    double bound = std::sqrt(6.0 / fan_in);
    if (l + 1 == net.layers()) bound *= 0.01;
    const std::size_t w = net.weight_offset(l);
    for (std::size_t k = 0; k < net.sizes[l + 1] * net.sizes[l]; ++k) net.params[w + k] = bound * unit(rng);
  }
  return net;
}

std::size_t Mlp::weight_offset(std::size_t layer) const {
  std::size_t off = 0;
  for (std::size_t l = 0; l < layer; ++l) off += sizes[l + 1] * (sizes[l] + 1);
  return off;
}

std::size_t Mlp::bias_offset(std::size_t layer) const {
  return weight_offset(layer) + sizes[layer + 1] * sizes[layer];
}

std::size_t Mlp::num_params() const { return count_params(sizes); }

void Mlp::validate() const {
  check_sizes(sizes);
  if (params.size() != num_params()) throw Error(Errc::ShapeMismatch, "parameter count does not match layer sizes");
  for (double p : params)
    if (!std::isfinite(p)) throw Error(Errc::ShapeMismatch, "non-finite network parameter");
}

std::vector<double> forward(const Mlp& net, std::span<const double> x, Tape* tape) {
  if (net.sizes.size() < 2 || x.size() != net.sizes.front() || net.params.size() != net.num_params())
    throw Error(Errc::ShapeMismatch, "network input or parameter shape mismatch");
  if (tape) {
    tape->inputs.assign(net.layers(), {});
    tape->pre.assign(net.layers(), {});
  }
  std::vector<double> a(x.begin(), x.end());
  for (std::size_t l = 0; l < net.layers(); ++l) {
    const std::size_t in = net.sizes[l];
    const std::size_t out = net.sizes[l + 1];
    const double* w = net.params.data() + net.weight_offset(l);
    const double* b = net.params.data() + net.bias_offset(l);
    std::vector<double> z(out);
    for (std::size_t r = 0; r < out; ++r) {
      double acc = b[r];
      for (std::size_t c = 0; c < in; ++c) acc += w[r * in + c] * a[c];
      z[r] = acc;
    }
    if (tape) {
      tape->inputs[l] = a;
      tape->pre[l] = z;
    }
    if (l + 1 < net.layers())
      for (auto& v : z) v = leaky(v);
    a = std::move(z);
  }
  return a;
}

void backward(const Mlp& net, const Tape& tape, std::span<const double> dout, std::span<double> grad) {
  if (grad.size() != net.params.size() || dout.size() != net.sizes.back() || tape.pre.size() != net.layers())
    throw Error(Errc::ShapeMismatch, "backward pass shape mismatch");
  std::vector<double> delta(dout.begin(), dout.end());
  for (std::size_t l = net.layers(); l-- > 0;) {
    const std::size_t in = net.sizes[l];
    const std::size_t out = net.sizes[l + 1];
    const double* w = net.params.data() + net.weight_offset(l);
    double* gw = grad.data() + net.weight_offset(l);
    double* gb = grad.data() + net.bias_offset(l);
    const auto& x = tape.inputs[l];
    for (std::size_t r = 0; r < out; ++r) {
      gb[r] += delta[r];
      for (std::size_t c = 0; c < in; ++c) gw[r * in + c] += delta[r] * x[c];
    }
    if (l == 0) break;
    std::vector<double> prev(in, 0.0);
    for (std::size_t r = 0; r < out; ++r)
      for (std::size_t c = 0; c < in; ++c) prev[c] += w[r * in + c] * delta[r];
    const auto& z = tape.pre[l - 1];
    for (std::size_t c = 0; c < in; ++c) prev[c] *= leaky_slope(z[c]);
    delta = std::move(prev);
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    p[k] = std::exp(logits[k] - top);
    sum += p[k];
  }
  for (auto& v : p) v /= sum;
  return p;
}

std::vector<double> forward_actor(const Mlp& actor, std::span<const double> state) {
  if (actor.head != Head::Softmax) throw Error(Errc::ShapeMismatch, "actor needs a softmax head");
  return softmax(forward(actor, state));
}

double forward_critic(const Mlp& critic, std::span<const double> state) {
  if (critic.head != Head::Linear || critic.sizes.back() != 1)
    throw Error(Errc::ShapeMismatch, "critic needs a single linear output");
  return forward(critic, state).front();
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log(p);
  return h;
}

// ---- advantage and updates ----

std::vector<double> nstep_targets(const Rollout& rollout, const Mlp& critic, double gamma, std::size_t n) {
  const std::size_t len = rollout.steps.size();
  if (len == 0) throw Error(Errc::ConfigInvalid, "empty rollout");
  if (n < 1) throw Error(Errc::ConfigInvalid, "n-step horizon must be at least 1");
  std::vector<double> out(len);
  for (std::size_t m = 0; m < len; ++m) {
    double acc = 0.0;
    double disc = 1.0;
    bool ended = false;
    std::size_t j = 0;
    for (; j < n && m + j < len; ++j) {
      acc += disc * rollout.steps[m + j].reward;
      disc *= gamma;
      if (rollout.steps[m + j].terminal) {
        ended = true;
        ++j;
        break;
      }
    }
    if (!ended) {
      const auto& next = m + j < len ? rollout.steps[m + j].state : rollout.bootstrap_state;
      if (!next.empty()) acc += disc * forward_critic(critic, next);
    }
    out[m] = acc;
  }
  return out;
}

std::vector<double> advantages(const Rollout& rollout, const Mlp& critic, double gamma, std::size_t n) {
  std::vector<double> a = nstep_targets(rollout, critic, gamma, n);
  for (std::size_t m = 0; m < a.size(); ++m) a[m] -= forward_critic(critic, rollout.steps[m].state);
  return a;
}

double critic_loss(const Mlp& critic, const Rollout& rollout, std::span<const double> targets) {
  double loss = 0.0;
  for (std::size_t m = 0; m < rollout.steps.size(); ++m) {
    const double r = targets[m] - forward_critic(critic, rollout.steps[m].state);
    loss += r * r;
  }
  return loss;
}

std::vector<double> critic_gradient(const Mlp& critic, const Rollout& rollout, std::span<const double> targets) {
  if (targets.size() != rollout.steps.size()) throw Error(Errc::ShapeMismatch, "one target per step required");
  std::vector<double> grad(critic.params.size(), 0.0);
  Tape tape;
  for (std::size_t m = 0; m < rollout.steps.size(); ++m) {
    const double v = forward(critic, rollout.steps[m].state, &tape).front();
    const double dv = -2.0 * (targets[m] - v);
    backward(critic, tape, std::span<const double>(&dv, 1), grad);
  }
  return grad;
}

void critic_step(Mlp& critic, const Rollout& rollout, std::span<const double> targets, double lr) {
  const auto g = critic_gradient(critic, rollout, targets);
  for (std::size_t k = 0; k < g.size(); ++k) critic.params[k] -= lr * g[k];
}

double actor_objective(const Mlp& actor, const Rollout& rollout, std::span<const double> adv, double entropy_coef) {
  double j = 0.0;
  for (std::size_t m = 0; m < rollout.steps.size(); ++m) {
    const auto p = forward_actor(actor, rollout.steps[m].state);
    j += adv[m] * std::log(p[rollout.steps[m].action]) + entropy_coef * entropy(p);
  }
  return j;
}

std::vector<double> actor_gradient(const Mlp& actor, const Rollout& rollout, std::span<const double> adv,
                                   double entropy_coef) {
  if (adv.size() != rollout.steps.size()) throw Error(Errc::ShapeMismatch, "one advantage per step required");
  std::vector<double> grad(actor.params.size(), 0.0);
  Tape tape;
  for (std::size_t m = 0; m < rollout.steps.size(); ++m) {
    const auto& step = rollout.steps[m];
    const auto p = softmax(forward(actor, step.state, &tape));
    if (step.action >= p.size()) throw Error(Errc::ShapeMismatch, "action outside the policy's range");
    const double h = entropy(p);
    std::vector<double> dz(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double dlogp = (k == step.action ? 1.0 : 0.0) - p[k];
      const double dh = p[k] > 0.0 ? -p[k] * (std::log(p[k]) + h) : 0.0;
      dz[k] = adv[m] * dlogp + entropy_coef * dh;
    }
    backward(actor, tape, dz, grad);
  }
  return grad;
}

void actor_step(Mlp& actor, const Rollout& rollout, std::span<const double> adv, double lr, double entropy_coef) {
  const auto g = actor_gradient(actor, rollout, adv, entropy_coef);
  for (std::size_t k = 0; k < g.size(); ++k) actor.params[k] += lr * g[k];
}

// ---- environment ----

StreamingEnv::StreamingEnv(std::vector<Episode> episodes, player::PlayerParams params)
    : episodes_(std::move(episodes)), params_(params) {
  if (episodes_.empty()) throw Error(Errc::ConfigInvalid, "environment without episodes");
  const std::size_t reps = episodes_.front().manifest->num_reps();
  for (const auto& e : episodes_) {
    if (e.trace == nullptr || e.manifest == nullptr) throw Error(Errc::ConfigInvalid, "incomplete episode");
    if (e.manifest->num_reps() != reps) throw Error(Errc::ConfigInvalid, "episodes disagree on the ladder size");
  }
  current_ = episodes_.front();
}

abr::Observation StreamingEnv::reset(Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, episodes_.size() - 1);
  current_ = episodes_[pick(rng)];
  state_ = {};
  return player::observe(state_, *current_.manifest, params_);
}

std::optional<StepOutcome> StreamingEnv::step(std::size_t action) {
  try {
    auto [rec, next] = player::step(state_, action, *current_.manifest, *current_.trace, params_);
    state_ = std::move(next);
    StepOutcome out;
    out.reward = rec.qoe;
    out.done = state_.next_chunk >= current_.manifest->num_chunks();
    out.obs = player::observe(state_, *current_.manifest, params_);
    return out;
  } catch (const Error& e) {
    if (e.code() == Errc::TraceExhausted) return std::nullopt;
    throw;
  }
}

std::size_t StreamingEnv::num_actions() const { return episodes_.front().manifest->num_reps(); }

std::size_t StreamingEnv::state_size() const { return state_dim(params_.history, num_actions()); }

// ---- training ----

void TrainConfig::validate() const {
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) throw Error(Errc::ConfigInvalid, "learning rates must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error(Errc::ConfigInvalid, "discount must lie in [0, 1]");
  if (!(reward_scale > 0.0)) throw Error(Errc::ConfigInvalid, "reward scale must be positive");
  if (rollout < 1) throw Error(Errc::ConfigInvalid, "rollout length must be at least 1");
  if (workers < 1) throw Error(Errc::ConfigInvalid, "need at least one worker");
  if (!(entropy_start >= 0.0) || !(entropy_end >= 0.0)) throw Error(Errc::ConfigInvalid, "entropy factors must be >= 0");
  if (!(rms_decay >= 0.0 && rms_decay < 1.0) || !(rms_epsilon > 0.0))
    throw Error(Errc::ConfigInvalid, "RMSProp decay must lie in [0, 1) and epsilon be positive");
  for (std::size_t h : hidden)
    if (h == 0) throw Error(Errc::ConfigInvalid, "hidden layer of width zero");
}

double TrainConfig::entropy_at(std::size_t episode) const {
  if (episodes <= 1) return entropy_start;
  const double frac = std::min(1.0, static_cast<double>(episode) / static_cast<double>(episodes - 1));
  return entropy_start + (entropy_end - entropy_start) * frac;
}

namespace {

std::size_t sample(const std::vector<double>& probs, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return k;
  }
  return probs.size() - 1;
}

Rng worker_rng(std::uint64_t seed, std::size_t worker) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(worker), 0x51u};
  return Rng(seq);
}

// Shared parameters. Readers copy a consistent snapshot; writers apply a
// whole update under the same lock.
class SharedModel {
 public:
  SharedModel(Model m, bool locked, const TrainConfig& cfg) : model_(std::move(m)), locked_(locked), cfg_(cfg) {
    if (cfg_.optimizer == Optimizer::RmsProp) {
      model_.actor_sq.resize(model_.actor.params.size(), 0.0);
      model_.critic_sq.resize(model_.critic.params.size(), 0.0);
    }
  }

  // networks only; optimizer statistics stay behind
  Model snapshot() const {
    std::unique_lock lock(mutex_, std::defer_lock);
    if (locked_) lock.lock();
    Model m;
    m.actor = model_.actor;
    m.critic = model_.critic;
    return m;
  }

  // critic descends its loss, actor ascends its objective
  void apply(const std::vector<double>& critic_grad, const std::vector<double>& actor_grad) {
    std::unique_lock lock(mutex_, std::defer_lock);
    if (locked_) lock.lock();
    update(model_.critic.params, model_.critic_sq, critic_grad, -cfg_.critic_lr);
    update(model_.actor.params, model_.actor_sq, actor_grad, cfg_.actor_lr);
  }

  Model& unsafe() { return model_; }

 private:
  void update(std::vector<double>& params, std::vector<double>& sq, const std::vector<double>& g, double step) const {
    if (cfg_.optimizer == Optimizer::Sgd) {
      for (std::size_t k = 0; k < g.size(); ++k) params[k] += step * g[k];
      return;
    }
    const double rho = cfg_.rms_decay;
    for (std::size_t k = 0; k < g.size(); ++k) {
      sq[k] = rho * sq[k] + (1.0 - rho) * g[k] * g[k];
      params[k] += step * g[k] / (std::sqrt(sq[k]) + cfg_.rms_epsilon);
    }
  }

  Model model_;
  bool locked_;
  const TrainConfig& cfg_;
  mutable std::mutex mutex_;
};

CurvePoint run_episode(Env& env, Rng& rng, SharedModel& shared, const TrainConfig& cfg, std::size_t episode) {
  const double phi = cfg.entropy_at(episode);
  std::vector<double> s = encode_state(env.reset(rng));
  double reward_sum = 0.0;
  std::size_t steps = 0;
  bool done = false;
  while (!done) {
    const Model local = shared.snapshot();
    Rollout ro;
    while (ro.steps.size() < cfg.rollout) {
      const std::size_t a = sample(forward_actor(local.actor, s), rng);
      const auto out = env.step(a);
      if (!out) {
        if (!ro.steps.empty()) ro.steps.back().terminal = true;
        done = true;
        break;
      }
      ro.steps.push_back({s, a, cfg.reward_scale * out->reward, out->done});
      reward_sum += out->reward;
      ++steps;
      s = encode_state(out->obs);
      if (out->done) {
        done = true;
        break;
      }
    }
    if (ro.steps.empty()) break;
    if (!ro.steps.back().terminal) ro.bootstrap_state = s;
    const auto targets = nstep_targets(ro, local.critic, cfg.gamma, cfg.rollout);
    std::vector<double> adv(targets.size());
    for (std::size_t m = 0; m < adv.size(); ++m) adv[m] = targets[m] - forward_critic(local.critic, ro.steps[m].state);
    const auto gc = critic_gradient(local.critic, ro, targets);
    const auto ga = actor_gradient(local.actor, ro, adv, phi);
    shared.apply(gc, ga);
  }
  return {episode, steps == 0 ? 0.0 : reward_sum / static_cast<double>(steps), phi};
}

}  // namespace

TrainResult train(const EnvFactory& factory, const TrainConfig& cfg, const Model* start) {
  cfg.validate();
  std::vector<std::unique_ptr<Env>> envs;
  for (std::size_t w = 0; w < cfg.workers; ++w) {
    envs.push_back(factory(w));
    if (!envs.back()) throw Error(Errc::ConfigInvalid, "environment factory returned nothing");
  }
  const std::size_t in = envs.front()->state_size();
  const std::size_t actions = envs.front()->num_actions();
  std::vector<std::size_t> actor_sizes{in};
  actor_sizes.insert(actor_sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
  std::vector<std::size_t> critic_sizes = actor_sizes;
  actor_sizes.push_back(actions);
  critic_sizes.push_back(1);

  Model init;
  if (start) {
    init = *start;
    init.actor.validate();
    init.critic.validate();
    if (init.actor.sizes.front() != in || init.actor.sizes.back() != actions || init.critic.sizes.front() != in)
      throw Error(Errc::ConfigInvalid, "checkpoint shape does not match the environment");
  } else {
    Rng rng(cfg.seed);
    init.actor = Mlp::random(actor_sizes, Head::Softmax, rng);
    init.critic = Mlp::random(critic_sizes, Head::Linear, rng);
  }
  const std::size_t first = init.episodes_done;

  TrainResult result;
  result.curve.resize(cfg.episodes);
  std::vector<Rng> rngs;
  for (std::size_t w = 0; w < cfg.workers; ++w) rngs.push_back(worker_rng(cfg.seed + first, w));

  if (cfg.serial || cfg.workers == 1) {
    SharedModel shared(std::move(init), false, cfg);
    for (std::size_t e = 0; e < cfg.episodes; ++e) {
      const std::size_t w = e % cfg.workers;
      result.curve[e] = run_episode(*envs[w], rngs[w], shared, cfg, e);
      result.curve[e].episode = first + e;
    }
    result.model = std::move(shared.unsafe());
  } else {
    SharedModel shared(std::move(init), true, cfg);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const int threads = static_cast<int>(cfg.workers);
#pragma omp parallel num_threads(threads)
    {
#pragma omp for schedule(static, 1)
      for (int w = 0; w < threads; ++w) {
        try {
          for (std::size_t e = next++; e < cfg.episodes; e = next++) {
            result.curve[e] = run_episode(*envs[static_cast<std::size_t>(w)], rngs[static_cast<std::size_t>(w)],
                                          shared, cfg, e);
            result.curve[e].episode = first + e;
          }
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = cfg.episodes;
        }
      }
    }
    if (failure) std::rethrow_exception(failure);
    result.model = std::move(shared.unsafe());
  }
  result.model.episodes_done = first + cfg.episodes;
  return result;
}

// ---- policy and files ----

DrlPolicy::DrlPolicy(Mlp actor) : actor_(std::move(actor)) {
  actor_.validate();
  if (actor_.head != Head::Softmax) throw Error(Errc::ConfigInvalid, "policy needs a softmax actor");
}

std::size_t DrlPolicy::decide(const abr::Observation& obs) const {
  const auto p = forward_actor(actor_, encode_state(obs));
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

namespace {

json net_to_json(const Mlp& net) {
  return {{"sizes", net.sizes}, {"head", net.head == Head::Softmax ? "softmax" : "linear"}, {"params", net.params}};
}

Mlp net_from_json(const json& j) {
  Mlp net;
  net.sizes = j.at("sizes").get<std::vector<std::size_t>>();
  const auto head = j.at("head").get<std::string>();
  if (head == "softmax")
    net.head = Head::Softmax;
  else if (head == "linear")
    net.head = Head::Linear;
  else
    throw Error(Errc::Malformed, "unknown head type '" + head + "'");
  net.params = j.at("params").get<std::vector<double>>();
  net.validate();
  return net;
}

}  // namespace

void write_checkpoint(const Model& model, const fs::path& path) {
  const json j{{"format", "qdsim-a3c/1"},
               {"state_encoding", kStateEncoding},
               {"episodes_done", model.episodes_done},
               {"actor", net_to_json(model.actor)},
               {"critic", net_to_json(model.critic)},
               {"actor_sq", model.actor_sq},
               {"critic_sq", model.critic_sq}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << j.dump() << '\n';
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

Model read_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  try {
    const json j = json::parse(in);
    if (j.at("state_encoding").get<std::string>() != kStateEncoding)
      throw Error(Errc::Malformed, "checkpoint uses a different state encoding");
    Model m;
    m.actor = net_from_json(j.at("actor"));
    m.critic = net_from_json(j.at("critic"));
    m.episodes_done = j.at("episodes_done").get<std::size_t>();
    if (j.contains("actor_sq")) m.actor_sq = j.at("actor_sq").get<std::vector<double>>();
    if (j.contains("critic_sq")) m.critic_sq = j.at("critic_sq").get<std::vector<double>>();
    if ((!m.actor_sq.empty() && m.actor_sq.size() != m.actor.params.size()) ||
        (!m.critic_sq.empty() && m.critic_sq.size() != m.critic.params.size()))
      throw Error(Errc::Malformed, "optimizer state does not match the networks");
    return m;
  } catch (const json::exception& e) {
    throw Error(Errc::Malformed, path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(Errc::Malformed, path.string() + ": " + e.what());
  }
}

void write_curve_csv(const std::vector<CurvePoint>& curve, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << "episode,mean_qoe,entropy_coef\n";
  char buf[128];
  for (const auto& c : curve) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", c.episode, c.mean_qoe, c.entropy_coef);
    out << buf;
  }
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

}  // namespace qdsim::rl
