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

#include "qdsim/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <type_traits>

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "qdsim/abr.hpp"
#include "qdsim/error.hpp"

namespace qdsim::cli {

namespace fs = std::filesystem;

// ---- configuration ----

namespace {

template <class F>
void visit(RunConfig& c, F&& f) {
  f("channel.power_budget_w", c.power_budget_w);
  f("channel.bandwidth_hz", c.bandwidth_hz);
  f("channel.noise_power", c.noise_power);
  f("channel.snr_gap", c.snr_gap);
  f("channel.doppler_hz", c.doppler_hz);
  f("channel.slot_s", c.slot_s);
  f("channel.pathloss_exponent", c.pathloss_exponent);
  f("channel.shadowing_sigma_db", c.shadowing_sigma_db);
  f("channel.ref_gain_db", c.ref_gain_db);
  f("channel.walking_speed", c.walking_speed);
  f("channel.move_period_s", c.move_period_s);
  f("channel.radius_m", c.radius_m);
  f("channel.min_radius_m", c.min_radius_m);
  f("solver.tol", c.solver_tol);
  f("solver.max_iter", c.solver_max_iter);
  f("solver.cadence", c.cadence);
  f("solver.beta", c.beta);
  f("solver.quality_floor", c.quality_floor);
  f("video.chunks", c.chunks);
  f("video.chunk_duration_s", c.chunk_duration_s);
  f("video.complexity_jitter", c.complexity_jitter);
  f("video.seed", c.video_seed);
  f("video.single_cell_video", c.single_cell_video);
  f("player.buffer_max_s", c.buffer_max_s);
  f("player.switch_penalty", c.switch_penalty);
  f("player.rebuffer_penalty", c.rebuffer_penalty);
  f("player.history", c.history);
  f("abr.reservoir_s", c.reservoir_s);
  f("abr.cushion_s", c.cushion_s);
  f("rl.actor_lr", c.train.actor_lr);
  f("rl.critic_lr", c.train.critic_lr);
  f("rl.gamma", c.train.gamma);
  f("rl.entropy_start", c.train.entropy_start);
  f("rl.entropy_end", c.train.entropy_end);
  f("rl.rollout", c.train.rollout);
  f("rl.workers", c.train.workers);
  f("rl.episodes", c.train.episodes);
  f("rl.hidden", c.train.hidden);
  f("rl.reward_scale", c.train.reward_scale);
  f("rl.optimizer", c.train.optimizer);
  f("rl.rms_decay", c.train.rms_decay);
  f("rl.rms_epsilon", c.train.rms_epsilon);
  f("rl.serial", c.train.serial);
  f("rl.resume", c.resume);
  f("run.scenario", c.scenario);
  f("run.scheme", c.scheme);
  f("run.seed", c.seed);
  f("run.out", c.out);
  f("run.duration_s", c.duration_s);
  f("run.n_train", c.n_train);
  f("run.n_test", c.n_test);
  f("run.chunk_trace", c.chunk_trace);
  f("run.psnr_offset_db", c.psnr_offset_db);
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T>
std::string to_text(const T& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else if constexpr (std::is_floating_point_v<T>) {
    return num(v);
  } else if constexpr (std::is_integral_v<T>) {
    return std::to_string(v);
  } else if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else if constexpr (std::is_same_v<T, rl::Optimizer>) {
    return v == rl::Optimizer::Sgd ? "sgd" : "rmsprop";
  } else {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
    return s;
  }
}

[[noreturn]] void bad_value(const std::string& key, const std::string& text) {
  throw Error(Errc::ConfigInvalid, "bad value '" + text + "' for " + key);
}

template <class I>
I parse_integral(const std::string& key, const std::string& text) {
  I v{};
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) bad_value(key, text);
  return v;
}

template <class T>
void from_text(const std::string& key, const std::string& text, T& out) {
  if constexpr (std::is_same_v<T, bool>) {
    if (text == "true" || text == "1")
      out = true;
    else if (text == "false" || text == "0")
      out = false;
    else
      bad_value(key, text);
  } else if constexpr (std::is_floating_point_v<T>) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) bad_value(key, text);
    out = v;
  } else if constexpr (std::is_integral_v<T>) {
    out = parse_integral<T>(key, text);
  } else if constexpr (std::is_same_v<T, std::string>) {
    out = text;
  } else if constexpr (std::is_same_v<T, rl::Optimizer>) {
    if (text == "sgd")
      out = rl::Optimizer::Sgd;
    else if (text == "rmsprop")
      out = rl::Optimizer::RmsProp;
    else
      bad_value(key, text);
  } else {
    out.clear();
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) out.push_back(parse_integral<std::size_t>(key, item));
    if (out.empty()) bad_value(key, text);
  }
}

}  // namespace

void RunConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(Errc::ConfigInvalid, what);
  };
  require(power_budget_w > 0.0 && bandwidth_hz > 0.0 && noise_power > 0.0, "power, bandwidth and noise must be positive");
  require(snr_gap >= 1.0, "SNR gap must be at least 1");
  require(doppler_hz >= 0.0 && slot_s > 0.0, "invalid fading parameters");
  require(radius_m > min_radius_m && min_radius_m > 0.0, "need 0 < min_radius < radius");
  require(solver_tol > 0.0 && solver_max_iter > 0 && cadence >= 1, "invalid solver settings");
  require(beta > 0.0 && beta <= 1.0 && quality_floor > 0.0, "invalid averaging settings");
  require(chunks > 0 && chunk_duration_s > 0.0 && complexity_jitter >= 0.0, "invalid video settings");
  require(buffer_max_s >= chunk_duration_s && switch_penalty >= 0.0 && rebuffer_penalty >= 0.0 && history >= 1,
          "invalid player settings");
  require(reservoir_s > 0.0 && cushion_s > 0.0 && reservoir_s + cushion_s <= buffer_max_s,
          "need 0 < reservoir, 0 < cushion, reservoir + cushion <= buffer size");
  require(scenario == "single_cell_siso" || scenario == "multicell_mimo", "unknown scenario");
  require(duration_s >= 1.0 && n_train >= 1 && n_test >= 1, "need a positive duration and trace counts");
  parse_schemes(scheme);
  train.validate();
  const auto profiles = player::default_profiles(bandwidth_hz, chunks, video_seed);
  require(std::any_of(profiles.begin(), profiles.end(), [&](const auto& p) { return p.name == single_cell_video; }),
          "unknown video profile");
}

RunConfig config_from_string(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(Errc::ConfigInvalid, std::string("config: ") + e.what());
  }
  RunConfig c;
  std::map<std::string, std::function<void(const std::string&)>> setters;
  visit(c, [&](const char* key, auto& field) {
    setters[key] = [&field, key](const std::string& v) { from_text(key, v, field); };
  });
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw Error(Errc::ConfigInvalid, "config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      const auto it = setters.find(section + "." + key);
      if (it == setters.end()) throw Error(Errc::ConfigInvalid, "config: unknown key " + section + "." + key);
      it->second(value.get_value<std::string>());
    }
  }
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_string(ss.str());
}

std::string dump_config(const RunConfig& config) {
  RunConfig c = config;
  std::ostringstream out;
  std::string current;
  visit(c, [&](const char* key, auto& field) {
    const std::string k(key);
    const auto dot = k.find('.');
    const std::string section = k.substr(0, dot);
    if (section != current) {
      out << (current.empty() ? "" : "\n") << '[' << section << "]\n";
      current = section;
    }
    out << k.substr(dot + 1) << " = " << to_text(field) << '\n';
  });
  return out.str();
}

// ---- schemes and scenarios ----

std::string mode_name(beamform::Mode mode) { return mode == beamform::Mode::Qddra ? "qddra" : "wmmse"; }

std::string Scheme::name() const {
  const char* a = abr == Abr::Drl ? "drl" : abr == Abr::Rb ? "rb" : "bb";
  return mode_name(mode) + "_" + a;
}

std::vector<Scheme> parse_schemes(const std::string& text) {
  std::vector<Scheme> all;
  for (auto m : {beamform::Mode::Qddra, beamform::Mode::Wmmse})
    for (auto a : {Scheme::Abr::Drl, Scheme::Abr::Rb, Scheme::Abr::Bb}) all.push_back({m, a});
  if (text == "all") return all;
  std::vector<Scheme> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    const auto it = std::find_if(all.begin(), all.end(), [&](const Scheme& s) { return s.name() == item; });
    if (it == all.end()) throw Error(Errc::ConfigInvalid, "unknown scheme '" + item + "'");
    out.push_back(*it);
  }
  if (out.empty()) throw Error(Errc::ConfigInvalid, "no scheme selected");
  return out;
}

namespace {

std::vector<beamform::Mode> modes_of(const std::vector<Scheme>& schemes, bool drl_only) {
  std::vector<beamform::Mode> out;
  for (const auto& s : schemes)
    if ((!drl_only || s.abr == Scheme::Abr::Drl) && std::find(out.begin(), out.end(), s.mode) == out.end())
      out.push_back(s.mode);
  return out;
}

}  // namespace

channel::Topology scenario_topology(const RunConfig& c) {
  if (c.scenario == "single_cell_siso") return channel::make_grid_topology(1, 4, 1, 1, c.power_budget_w, c.radius_m, c.min_radius_m);
  if (c.scenario == "multicell_mimo") return channel::make_grid_topology(4, 3, 3, 2, c.power_budget_w, c.radius_m, c.min_radius_m);
  throw Error(Errc::ConfigInvalid, "unknown scenario '" + c.scenario + "'");
}

std::vector<player::VideoProfile> user_profiles(const RunConfig& c) {
  auto profiles = player::default_profiles(c.bandwidth_hz, c.chunks, c.video_seed);
  for (auto& p : profiles) {
    p.chunk_duration_s = c.chunk_duration_s;
    p.complexity_jitter = c.complexity_jitter;
  }
  const auto topo = scenario_topology(c);
  std::vector<player::VideoProfile> out;
  if (c.scenario == "single_cell_siso") {
    const auto it = std::find_if(profiles.begin(), profiles.end(),
                                 [&](const auto& p) { return p.name == c.single_cell_video; });
    if (it == profiles.end()) throw Error(Errc::ConfigInvalid, "unknown video profile '" + c.single_cell_video + "'");
    out.assign(topo.num_users(), *it);
  } else {
    for (std::size_t cell = 0; cell < topo.num_cells(); ++cell) {
      const auto members = topo.users_in_cell(cell);
      for (std::size_t k = 0; k < members.size(); ++k) out.push_back(profiles[k % profiles.size()]);
    }
  }
  return out;
}

tracegen::Scenario make_scenario(const RunConfig& c, beamform::Mode mode,
                                 const std::vector<player::VideoManifest>& videos) {
  tracegen::Scenario sc;
  sc.topology = scenario_topology(c);
  sc.channel.pathloss_exponent = c.pathloss_exponent;
  sc.channel.shadowing_sigma_db = c.shadowing_sigma_db;
  sc.channel.ref_gain_db = c.ref_gain_db;
  sc.channel.walking_speed = c.walking_speed;
  sc.channel.move_period = c.move_period_s;
  sc.channel.doppler_hz = c.doppler_hz;
  sc.channel.slot_s = c.slot_s;
  sc.channel.noise_power = c.noise_power;
  sc.mode = mode;
  sc.stop.tol = c.solver_tol;
  sc.stop.max_iter = c.solver_max_iter;
  sc.duration_s = c.duration_s;
  sc.cadence = c.cadence;
  sc.seed = c.seed;
  sc.snr_gap = c.snr_gap;
  sc.bandwidth_hz = c.bandwidth_hz;
  sc.beta = c.beta;
  sc.quality_floor = c.quality_floor;
  for (const auto& v : videos) sc.videos.push_back(v.schedule());
  return sc;
}

player::PlayerParams player_params(const RunConfig& c) {
  player::PlayerParams p;
  p.buffer_max_s = c.buffer_max_s;
  p.switch_penalty = c.switch_penalty;
  p.rebuffer_penalty = c.rebuffer_penalty;
  p.history = c.history;
  return p;
}

// ---- fairness ----

Fairness jain_fairness(std::span<const double> xs) {
  double sum = 0.0;
  double sq = 0.0;
  for (double x : xs) {
    if (!(x >= 0.0)) throw Error(Errc::ConfigInvalid, "fairness needs nonnegative values");
    sum += x;
    sq += x * x;
  }
  if (xs.empty() || sq == 0.0) throw Error(Errc::EmptyOrAllZero, "fairness of an empty or all-zero set");
  Fairness f;
  f.jain = sum * sum / (static_cast<double>(xs.size()) * sq);
  f.unfairness = std::sqrt(std::max(0.0, 1.0 - f.jain));
  return f;
}

namespace {

// all-zero groups are perfectly even
double unfairness_or_zero(std::span<const double> xs) {
  try {
    return jain_fairness(xs).unfairness;
  } catch (const Error& e) {
    if (e.code() != Errc::EmptyOrAllZero) throw;
    return 0.0;
  }
}

}  // namespace

double intra_cell_unfairness(std::span<const double> per_user, const channel::Topology& topology) {
  if (per_user.size() != topology.num_users()) throw Error(Errc::ShapeMismatch, "one value per user expected");
  double acc = 0.0;
  for (std::size_t cell = 0; cell < topology.num_cells(); ++cell) {
    std::vector<double> xs;
    for (std::size_t u : topology.users_in_cell(cell)) xs.push_back(per_user[u]);
    acc += unfairness_or_zero(xs);
  }
  return acc / static_cast<double>(topology.num_cells());
}

double total_unfairness(std::span<const double> per_user) { return unfairness_or_zero(per_user); }

double rate_unfairness(const std::vector<tracegen::RateTrace>& traces) {
  std::vector<double> means;
  for (const auto& t : traces) {
    double s = 0.0;
    for (double r : t.rate_bps) s += r;
    means.push_back(t.rate_bps.empty() ? 0.0 : s / static_cast<double>(t.rate_bps.size()));
  }
  return unfairness_or_zero(means);
}

// ---- paths ----

fs::path Paths::traces(beamform::Mode mode) const { return root / "traces" / mode_name(mode); }
fs::path Paths::videos() const { return root / "videos"; }
fs::path Paths::model(beamform::Mode mode) const { return root / "models" / mode_name(mode); }
fs::path Paths::eval(const Scheme& scheme) const { return root / "eval" / scheme.name(); }
fs::path Paths::report() const { return root / "report"; }

namespace {

void write_effective_config(const RunConfig& c, const std::string& command) {
  fs::create_directories(c.out);
  std::ofstream out(fs::path(c.out) / (command + ".config.ini"), std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write the effective config under " + c.out);
  out << dump_config(c);
}

[[noreturn]] void missing(const fs::path& p, const std::string& hint) {
  throw Error(Errc::MissingArtifacts, p.string() + " not found; " + hint);
}

std::vector<player::VideoManifest> load_videos(const RunConfig& c, const Paths& paths) {
  std::vector<player::VideoManifest> out;
  for (const auto& p : user_profiles(c)) {
    const auto file = paths.videos() / (p.name + ".json");
    if (!fs::exists(file)) missing(file, "run gen-traces first");
    out.push_back(player::read_manifest(file));
  }
  return out;
}

tracegen::SplitManifest load_split(const Paths& paths, beamform::Mode mode) {
  const auto file = paths.traces(mode) / "split.txt";
  if (!fs::exists(file)) missing(file, "run gen-traces first");
  return tracegen::read_split(file);
}

std::vector<std::vector<tracegen::RateTrace>> load_traces(const std::vector<fs::path>& files, std::size_t users) {
  std::vector<std::vector<tracegen::RateTrace>> out;
  for (const auto& f : files) {
    if (!fs::exists(f)) missing(f, "trace listed in the split manifest");
    auto traces = tracegen::read_trace(f);
    if (traces.size() != users)
      throw Error(Errc::Malformed, f.string() + ": user count does not match the scenario");
    out.push_back(std::move(traces));
  }
  return out;
}

}  // namespace

// ---- commands ----

void gen_traces(const RunConfig& c) {
  c.validate();
  write_effective_config(c, "gen-traces");
  const Paths paths{c.out};
  fs::create_directories(paths.videos());
  std::vector<player::VideoManifest> videos;
  for (const auto& p : user_profiles(c)) {
    videos.push_back(player::synth_manifest(p));
    player::write_manifest(videos.back(), paths.videos() / (p.name + ".json"));
  }
  for (auto mode : modes_of(parse_schemes(c.scheme), false)) {
    const auto sc = make_scenario(c, mode, videos);
    tracegen::make_split(c.n_train, c.n_test, c.seed, sc, paths.traces(mode));
    std::cout << "wrote " << c.n_train << " train and " << c.n_test << " test traces to "
              << paths.traces(mode).string() << '\n';
  }
}

void train(const RunConfig& c) {
  c.validate();
  write_effective_config(c, "train");
  const Paths paths{c.out};
  const auto videos = load_videos(c, paths);
  const auto pp = player_params(c);
  const auto modes = modes_of(parse_schemes(c.scheme), true);
  if (modes.empty()) std::cout << "no learned scheme selected; nothing to train\n";
  for (auto mode : modes) {
    const auto split = load_split(paths, mode);
    const auto traces = load_traces(split.train, videos.size());
    std::vector<rl::Episode> episodes;
    for (const auto& set : traces)
      for (const auto& t : set) episodes.push_back({&t, &videos.at(t.user)});
    rl::TrainConfig tc = c.train;
    tc.seed = c.seed;
    std::optional<rl::Model> start;
    if (!c.resume.empty()) {
      if (!fs::exists(c.resume)) missing(c.resume, "checkpoint to resume from");
      start = rl::read_checkpoint(c.resume);
    }
    const rl::EnvFactory factory = [&](std::size_t) { return std::make_unique<rl::StreamingEnv>(episodes, pp); };
    const auto result = rl::train(factory, tc, start ? &*start : nullptr);
    fs::create_directories(paths.model(mode));
    rl::write_checkpoint(result.model, paths.model(mode) / "checkpoint.json");
    rl::write_curve_csv(result.curve, paths.model(mode) / "curve.csv");
    std::cout << "trained " << mode_name(mode) << " policy for " << tc.episodes << " episodes ("
              << result.model.episodes_done << " in total)\n";
  }
}

namespace {

struct SessionRow {
  std::size_t trace = 0;
  std::size_t user = 0;
  std::size_t cell = 0;
  player::SessionSummary summary;
};

SchemeSummary summarize_rows(const std::string& name, const std::vector<SessionRow>& rows) {
  SchemeSummary s;
  s.scheme = name;
  if (rows.empty()) return s;
  std::map<std::size_t, std::vector<const SessionRow*>> by_trace;
  for (const auto& r : rows) {
    s.mean_qoe += r.summary.mean_qoe;
    s.mean_quality_db += r.summary.mean_quality_db;
    s.mean_abs_switch_db += r.summary.mean_abs_switch_db;
    s.mean_rebuffer_s += r.summary.total_rebuffer_s;
    by_trace[r.trace].push_back(&r);
  }
  const auto n = static_cast<double>(rows.size());
  s.mean_qoe /= n;
  s.mean_quality_db /= n;
  s.mean_abs_switch_db /= n;
  s.mean_rebuffer_s /= n;
  // QoE can go negative under heavy stalling; such users count as zero
  for (const auto& [trace, members] : by_trace) {
    std::vector<double> all;
    std::map<std::size_t, std::vector<double>> cells;
    for (const auto* r : members) {
      const double q = std::max(0.0, r->summary.mean_qoe);
      all.push_back(q);
      cells[r->cell].push_back(q);
    }
    double intra = 0.0;
    for (const auto& [cell, xs] : cells) intra += unfairness_or_zero(xs);
    s.intra_cell_unfairness += intra / static_cast<double>(cells.size());
    s.total_unfairness += unfairness_or_zero(all);
  }
  s.intra_cell_unfairness /= static_cast<double>(by_trace.size());
  s.total_unfairness /= static_cast<double>(by_trace.size());
  return s;
}

constexpr const char* kSessionHeader =
    "trace,user,cell,chunks,mean_qoe,mean_quality_db,mean_abs_switch_db,total_rebuffer_s";

void write_rows(const std::vector<SessionRow>& rows, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << kSessionHeader << '\n';
  for (const auto& r : rows)
    out << r.trace << ',' << r.user << ',' << r.cell << ',' << r.summary.chunks << ',' << num(r.summary.mean_qoe)
        << ',' << num(r.summary.mean_quality_db) << ',' << num(r.summary.mean_abs_switch_db) << ','
        << num(r.summary.total_rebuffer_s) << '\n';
}

std::vector<SessionRow> read_rows(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kSessionHeader) throw Error(Errc::Malformed, path.string() + ": bad header");
  std::vector<SessionRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string item; std::getline(ss, item, ',');) f.push_back(item);
    if (f.size() != 8) throw Error(Errc::Malformed, path.string() + ":" + std::to_string(lineno) + ": expected 8 fields");
    SessionRow r;
    try {
      r.trace = std::stoul(f[0]);
      r.user = std::stoul(f[1]);
      r.cell = std::stoul(f[2]);
      r.summary.chunks = std::stoul(f[3]);
      r.summary.mean_qoe = std::stod(f[4]);
      r.summary.mean_quality_db = std::stod(f[5]);
      r.summary.mean_abs_switch_db = std::stod(f[6]);
      r.summary.total_rebuffer_s = std::stod(f[7]);
    } catch (const std::exception&) {
      throw Error(Errc::Malformed, path.string() + ":" + std::to_string(lineno) + ": unparseable field");
    }
    rows.push_back(r);
  }
  return rows;
}

void write_summaries(const std::vector<SchemeSummary>& rows, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << "scheme,mean_qoe,mean_quality_db,mean_abs_switch_db,mean_rebuffer_s,intra_cell_unfairness,total_unfairness\n";
  for (const auto& s : rows)
    out << s.scheme << ',' << num(s.mean_qoe) << ',' << num(s.mean_quality_db) << ',' << num(s.mean_abs_switch_db)
        << ',' << num(s.mean_rebuffer_s) << ',' << num(s.intra_cell_unfairness) << ',' << num(s.total_unfairness)
        << '\n';
}

}  // namespace

std::vector<SchemeSummary> evaluate(const RunConfig& c) {
  c.validate();
  write_effective_config(c, "evaluate");
  const Paths paths{c.out};
  const auto videos = load_videos(c, paths);
  const auto topo = scenario_topology(c);
  const auto pp = player_params(c);
  std::vector<SchemeSummary> summaries;
  for (const auto& scheme : parse_schemes(c.scheme)) {
    const auto split = load_split(paths, scheme.mode);
    const auto traces = load_traces(split.test, videos.size());
    std::unique_ptr<abr::Policy> policy;
    switch (scheme.abr) {
      case Scheme::Abr::Rb:
        policy = std::make_unique<abr::RateBased>();
        break;
      case Scheme::Abr::Bb:
        policy = std::make_unique<abr::BufferBased>(c.reservoir_s, c.cushion_s);
        break;
      case Scheme::Abr::Drl: {
        const auto ckpt = paths.model(scheme.mode) / "checkpoint.json";
        if (!fs::exists(ckpt)) missing(ckpt, "run train first");
        policy = std::make_unique<rl::DrlPolicy>(rl::read_checkpoint(ckpt).actor);
        break;
      }
    }
    const std::size_t users = videos.size();
    std::vector<SessionRow> rows(traces.size() * users);
    std::vector<player::Session> chosen(users);
    const auto jobs = static_cast<long>(rows.size());
#pragma omp parallel for schedule(dynamic)
    for (long j = 0; j < jobs; ++j) {
      const auto k = static_cast<std::size_t>(j) / users;
      const auto u = static_cast<std::size_t>(j) % users;
      auto session = player::run_session(traces[k][u], videos[u], *policy, pp);
      rows[static_cast<std::size_t>(j)] = {k, u, topo.users[u].cell, session.summary};
      if (k == c.chunk_trace) chosen[u] = std::move(session);
    }
    const auto dir = paths.eval(scheme);
    fs::create_directories(dir);
    write_rows(rows, dir / "sessions.csv");
    {
      std::ofstream out(dir / "per_user.csv", std::ios::binary);
      out << "user,cell,mean_qoe,mean_quality_db,mean_abs_switch_db,mean_rebuffer_s\n";
      for (std::size_t u = 0; u < users; ++u) {
        double q = 0, ql = 0, sw = 0, rb = 0;
        for (std::size_t k = 0; k < traces.size(); ++k) {
          const auto& s = rows[k * users + u].summary;
          q += s.mean_qoe;
          ql += s.mean_quality_db;
          sw += s.mean_abs_switch_db;
          rb += s.total_rebuffer_s;
        }
        const auto n = static_cast<double>(traces.size());
        out << u << ',' << topo.users[u].cell << ',' << num(q / n) << ',' << num(ql / n) << ',' << num(sw / n) << ','
            << num(rb / n) << '\n';
      }
    }
    {
      std::vector<double> qoe;
      for (const auto& r : rows) qoe.push_back(r.summary.mean_qoe);
      std::sort(qoe.begin(), qoe.end());
      std::ofstream out(dir / "cdf.csv", std::ios::binary);
      out << "qoe,cdf\n";
      for (std::size_t k = 0; k < qoe.size(); ++k)
        out << num(qoe[k]) << ',' << num(static_cast<double>(k + 1) / static_cast<double>(qoe.size())) << '\n';
    }
    if (c.chunk_trace < traces.size())
      for (std::size_t u = 0; u < users; ++u)
        player::write_session_csv(chosen[u].records, dir / ("chunks_user" + std::to_string(u) + ".csv"));
    summaries.push_back(summarize_rows(scheme.name(), rows));
  }
  fs::create_directories(paths.root / "eval");
  write_summaries(summaries, paths.root / "eval" / "summary.csv");
  return summaries;
}

std::vector<SchemeSummary> report(const RunConfig& c) {
  c.validate();
  const Paths paths{c.out};
  std::vector<SchemeSummary> summaries;
  for (const auto& scheme : parse_schemes(c.scheme)) {
    const auto file = paths.eval(scheme) / "sessions.csv";
    if (!fs::exists(file)) continue;
    summaries.push_back(summarize_rows(scheme.name(), read_rows(file)));
  }
  if (summaries.empty()) missing(paths.root / "eval", "run evaluate first");
  fs::create_directories(paths.report());
  write_summaries(summaries, paths.report() / "schemes.csv");

  std::ofstream rates(paths.report() / "rates.csv", std::ios::binary);
  rates << "mode,mean_rate_unfairness,mean_sum_rate_bps,traces\n";
  for (auto mode : modes_of(parse_schemes(c.scheme), false)) {
    const auto split_file = paths.traces(mode) / "split.txt";
    if (!fs::exists(split_file)) continue;
    const auto split = tracegen::read_split(split_file);
    double unf = 0.0;
    double sum_rate = 0.0;
    for (const auto& f : split.test) {
      const auto traces = tracegen::read_trace(f);
      unf += rate_unfairness(traces);
      for (const auto& t : traces)
        for (double r : t.rate_bps) sum_rate += r / static_cast<double>(t.rate_bps.size());
    }
    const auto n = static_cast<double>(split.test.size());
    rates << mode_name(mode) << ',' << num(unf / n) << ',' << num(sum_rate / n) << ',' << split.test.size() << '\n';
  }

  std::printf("%-10s %9s %12s %9s %10s %10s %10s\n", "scheme", "QoE", "quality-off", "|dq|", "rebuf s", "unf intra",
              "unf total");
  for (const auto& s : summaries)
    std::printf("%-10s %9.3f %12.3f %9.3f %10.3f %10.4f %10.4f\n", s.scheme.c_str(), s.mean_qoe,
                s.mean_quality_db - c.psnr_offset_db, s.mean_abs_switch_db, s.mean_rebuffer_s,
                s.intra_cell_unfairness, s.total_unfairness);
  return summaries;
}

// ---- command line ----

int run_main(int argc, char** argv) {
  CLI::App app{"Quality-driven beamforming and bitrate adaptation experiments"};
  app.require_subcommand(1);
  struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> scenario;
    std::optional<std::string> scheme;
    std::optional<std::string> out;
    std::optional<double> duration;
    std::optional<std::size_t> n_train;
    std::optional<std::size_t> n_test;
    std::optional<std::size_t> workers;
    std::optional<std::size_t> episodes;
    std::optional<std::string> resume;
    bool serial = false;
    bool dump = false;
  } flags;
  const std::pair<const char*, const char*> commands[] = {
      {"gen-traces", "write videos and train/test rate traces for both beamformers"},
      {"train", "train the actor-critic policy on each beamformer's training traces"},
      {"evaluate", "stream the test traces under every selected scheme"},
      {"report", "tabulate QoE, quality, switching, stalls and fairness per scheme"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "INI run configuration");
    sub->add_option("--seed", flags.seed);
    sub->add_option("--scenario", flags.scenario, "single_cell_siso or multicell_mimo");
    sub->add_option("--scheme", flags.scheme, "all, or comma-separated e.g. qddra_drl,wmmse_bb");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--duration", flags.duration, "trace length in seconds");
    sub->add_option("--n-train", flags.n_train);
    sub->add_option("--n-test", flags.n_test);
    sub->add_option("--workers", flags.workers, "training workers");
    sub->add_option("--episodes", flags.episodes, "training episodes");
    sub->add_option("--resume", flags.resume, "checkpoint to continue training from");
    sub->add_flag("--serial", flags.serial, "interleave training workers on one thread");
    sub->add_flag("--dump-config", flags.dump, "print the effective configuration and exit");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  RunConfig config;
  try {
    if (!flags.config.empty()) config = load_config(flags.config);
    if (flags.seed) config.seed = *flags.seed;
    if (flags.scenario) config.scenario = *flags.scenario;
    if (flags.scheme) config.scheme = *flags.scheme;
    if (flags.out) config.out = *flags.out;
    if (flags.duration) config.duration_s = *flags.duration;
    if (flags.n_train) config.n_train = *flags.n_train;
    if (flags.n_test) config.n_test = *flags.n_test;
    if (flags.workers) config.train.workers = *flags.workers;
    if (flags.episodes) config.train.episodes = *flags.episodes;
    if (flags.resume) config.resume = *flags.resume;
    if (flags.serial) config.train.serial = true;
    config.validate();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == Errc::Io ? 2 : 1;
  }
  if (flags.dump) {
    std::cout << dump_config(config);
    return 0;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  try {
    if (cmd == "gen-traces")
      gen_traces(config);
    else if (cmd == "train")
      train(config);
    else if (cmd == "evaluate")
      evaluate(config);
    else
      report(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

}  // namespace qdsim::cli
