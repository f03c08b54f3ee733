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

#include "qdsim/tracegen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "qdsim/error.hpp"

namespace qdsim::tracegen {

namespace fs = std::filesystem;

const quality::RQParams& VideoSchedule::at(double t) const {
  const auto chunk = static_cast<std::size_t>(std::floor(t / chunk_duration_s + 1e-9));
  return chunk_z[chunk % chunk_z.size()];
}

std::size_t Scenario::slots_per_second() const {
  return static_cast<std::size_t>(std::llround(1.0 / channel.slot_s));
}

void Scenario::validate() const {
  topology.validate();
  if (!(duration_s >= 1.0) || std::fabs(duration_s - std::round(duration_s)) > 1e-9)
    throw Error(Errc::ConfigInvalid, "duration must be a whole number of seconds");
  if (cadence < 1) throw Error(Errc::ConfigInvalid, "solve cadence must be at least 1");
  if (!(channel.slot_s > 0.0) ||
      std::fabs(static_cast<double>(slots_per_second()) * channel.slot_s - 1.0) > 1e-9)
    throw Error(Errc::ConfigInvalid, "slot length must divide one second");
  if (videos.size() != topology.num_users()) throw Error(Errc::ConfigInvalid, "need one video schedule per user");
  for (const auto& v : videos) {
    if (v.chunk_z.empty() || !(v.chunk_duration_s > 0.0))
      throw Error(Errc::ConfigInvalid, "empty video schedule");
    for (const auto& z : v.chunk_z)
      if (!z.valid()) throw Error(Errc::ConfigInvalid, "invalid rate-quality parameters in schedule");
  }
  if (!(beta > 0.0 && beta <= 1.0)) throw Error(Errc::ConfigInvalid, "beta must lie in (0, 1]");
  if (!(quality_floor > 0.0)) throw Error(Errc::ConfigInvalid, "quality floor must be positive");
}

Generated generate(const Scenario& sc, bool keep_slot_rates) {
  sc.validate();
  channel::ChannelEngine engine(sc.topology, sc.channel, sc.seed);
  const std::size_t users = sc.topology.num_users();
  const std::size_t per_second = sc.slots_per_second();
  const auto seconds = static_cast<std::size_t>(std::llround(sc.duration_s));

  beamform::SlotProblem problem;
  problem.topology = &engine.topology();
  problem.snr_gap = sc.snr_gap;
  problem.bandwidth_hz = sc.bandwidth_hz;
  problem.weights.assign(users, 1.0);
  problem.rq.resize(users);

  Generated out;
  out.traces.resize(users);
  for (std::size_t i = 0; i < users; ++i) {
    out.traces[i].user = i;
    out.traces[i].rate_bps.reserve(seconds);
  }
  auto& diag = out.diagnostics;
  diag.min_avg_quality = std::numeric_limits<double>::infinity();
  diag.max_avg_quality = -std::numeric_limits<double>::infinity();

  std::vector<double> avg_quality;
  std::vector<double> rates(users, 0.0);
  std::vector<double> second_sum(users, 0.0);
  beamform::Beams held;

  for (std::size_t slot = 0; slot < seconds * per_second; ++slot) {
    if (slot > 0) engine.advance();
    const double t = static_cast<double>(slot) * sc.channel.slot_s;
    problem.snapshot = engine.current();
    for (std::size_t i = 0; i < users; ++i) problem.rq[i] = sc.videos[i].at(t);

    try {
      if (slot % sc.cadence == 0) {
        if (avg_quality.empty()) {
          // Q⁰ from one equally weighted solve
          std::fill(problem.weights.begin(), problem.weights.end(), 1.0);
          const auto first = beamform::solve_slot(problem, beamform::initial_transmit(problem), sc.mode, sc.stop);
          avg_quality.resize(users);
          for (std::size_t i = 0; i < users; ++i) avg_quality[i] = std::max(first.quality_db[i], sc.quality_floor);
        }
        for (std::size_t i = 0; i < users; ++i)
          problem.weights[i] = sc.mode == beamform::Mode::Qddra ? 1.0 / avg_quality[i] : 1.0;
        auto res = beamform::solve_slot(problem, beamform::initial_transmit(problem), sc.mode, sc.stop);
        ++diag.solves;
        diag.solver_iterations += static_cast<std::size_t>(res.iterations);
        diag.backtracks += static_cast<std::size_t>(res.backtracks);
        held = std::move(res.beams.v);
        rates = std::move(res.rate_bps);
      } else {
        for (std::size_t i = 0; i < users; ++i) rates[i] = beamform::rate(problem, held, i);
      }
    } catch (const Error& err) {
      std::ostringstream os;
      os << "trace seed " << sc.seed << ", slot " << slot << ": " << err.what();
      throw Error(err.code(), os.str());
    }

    for (std::size_t i = 0; i < users; ++i) {
      const double q = quality::quality_of_rate(rates[i], problem.rq[i]);
      avg_quality[i] = std::max(sc.quality_floor, beamform::update_avg_quality(avg_quality[i], q, sc.beta));
      diag.min_avg_quality = std::min(diag.min_avg_quality, avg_quality[i]);
      diag.max_avg_quality = std::max(diag.max_avg_quality, avg_quality[i]);
      second_sum[i] += rates[i];
    }
    if (keep_slot_rates) out.slot_rates.push_back(rates);
    ++diag.slots;

    if ((slot + 1) % per_second == 0) {
      for (std::size_t i = 0; i < users; ++i) {
        out.traces[i].rate_bps.push_back(second_sum[i] / static_cast<double>(per_second));
        second_sum[i] = 0.0;
      }
    }
  }
  return out;
}

namespace {

std::vector<Generated> batch_impl(const std::vector<Scenario>& scenarios, bool parallel) {
  const auto n = static_cast<std::ptrdiff_t>(scenarios.size());
  std::vector<Generated> out(scenarios.size());
  // first failure wins; the rest of the batch still runs to completion
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    try {
      out[static_cast<std::size_t>(k)] = generate(scenarios[static_cast<std::size_t>(k)]);
    } catch (...) {
#pragma omp critical(qdsim_tracegen_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace

std::vector<Generated> generate_batch(const std::vector<Scenario>& scenarios) { return batch_impl(scenarios, true); }

std::vector<Generated> generate_batch_serial(const std::vector<Scenario>& scenarios) {
  return batch_impl(scenarios, false);
}

namespace {

constexpr const char* kTraceHeader = "time_s,user_id,rate_bps";

[[noreturn]] void malformed(const fs::path& path, std::size_t line, const std::string& why) {
  std::ostringstream os;
  os << path.string() << ":" << line << ": " << why;
  throw Error(Errc::Malformed, os.str());
}

template <typename T>
bool parse_field(std::string_view text, T& value) {
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, value);
  return res.ec == std::errc{} && res.ptr == end;
}

}  // namespace

void write_trace(const std::vector<RateTrace>& traces, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << kTraceHeader << '\n';
  const std::size_t seconds = traces.empty() ? 0 : traces.front().duration_s();
  for (const auto& tr : traces)
    if (tr.duration_s() != seconds) throw Error(Errc::ShapeMismatch, "traces of one file must share a duration");
  char buf[64];
  for (std::size_t s = 0; s < seconds; ++s)
    for (const auto& tr : traces) {
      std::snprintf(buf, sizeof buf, "%.17g", tr.rate_bps[s]);
      out << s << ',' << tr.user << ',' << buf << '\n';
    }
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

std::vector<RateTrace> read_trace(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) malformed(path, lineno, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) malformed(path, lineno, "unexpected header '" + line + "'");

  std::vector<RateTrace> traces;
  std::vector<std::size_t> user_order;
  std::size_t expect_second = 0;
  std::size_t column = 0;  // position within the current second
  bool first_second = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) malformed(path, lineno, "empty line");
    const auto c1 = line.find(',');
    const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    if (c2 == std::string::npos || line.find(',', c2 + 1) != std::string::npos)
      malformed(path, lineno, "expected three fields");
    std::size_t second = 0;
    std::size_t user = 0;
    double rate = 0.0;
    const std::string_view view(line);
    if (!parse_field(view.substr(0, c1), second) || !parse_field(view.substr(c1 + 1, c2 - c1 - 1), user) ||
        !parse_field(view.substr(c2 + 1), rate))
      malformed(path, lineno, "unparseable field");
    if (!std::isfinite(rate) || rate < 0.0) malformed(path, lineno, "rate must be finite and nonnegative");

    if (first_second && second == 0) {
      if (std::find(user_order.begin(), user_order.end(), user) != user_order.end())
        malformed(path, lineno, "duplicate user within a second");
      user_order.push_back(user);
      traces.push_back({user, {rate}});
      continue;
    }
    if (first_second) {
      first_second = false;
      expect_second = 1;
      column = 0;
    }
    if (second != expect_second || column >= user_order.size() || user != user_order[column])
      malformed(path, lineno, "row out of order");
    traces[column].rate_bps.push_back(rate);
    if (++column == user_order.size()) {
      column = 0;
      ++expect_second;
    }
  }
  if (traces.empty()) malformed(path, lineno, "no samples");
  if (column != 0) malformed(path, lineno, "truncated: last second incomplete");
  return traces;
}

namespace {

std::string member_name(const char* prefix, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%03zu.csv", prefix, index);
  return buf;
}

}  // namespace

SplitManifest make_split(std::size_t n_train, std::size_t n_test, std::uint64_t base_seed, const Scenario& scenario,
                         const fs::path& out_dir, bool parallel) {
  if (n_train < 1 || n_test < 1) throw Error(Errc::ConfigInvalid, "split counts must be at least 1");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(Errc::Io, "cannot create " + out_dir.string() + ": " + ec.message());

  SplitManifest split;
  std::vector<Scenario> jobs;
  for (std::size_t k = 0; k < n_train + n_test; ++k) {
    Scenario s = scenario;
    s.seed = base_seed + k;
    jobs.push_back(std::move(s));
    if (k < n_train) {
      split.train.push_back(out_dir / member_name("train", k));
      split.train_seeds.push_back(base_seed + k);
    } else {
      split.test.push_back(out_dir / member_name("test", k - n_train));
      split.test_seeds.push_back(base_seed + k);
    }
  }
  const auto runs = parallel ? generate_batch(jobs) : generate_batch_serial(jobs);
  for (std::size_t k = 0; k < runs.size(); ++k)
    write_trace(runs[k].traces, k < n_train ? split.train[k] : split.test[k - n_train]);
  write_split(split, out_dir / "split.txt");
  return split;
}

void write_split(const SplitManifest& split, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  const fs::path base = path.parent_path();
  const auto section = [&](const char* name, const std::vector<fs::path>& members,
                           const std::vector<std::uint64_t>& seeds) {
    out << '[' << name << "]\n";
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (i < seeds.size()) out << "# seed " << seeds[i] << '\n';
      out << members[i].lexically_relative(base.empty() ? fs::path(".") : base).generic_string() << '\n';
    }
  };
  section("train", split.train, split.train_seeds);
  section("test", split.test, split.test_seeds);
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

SplitManifest read_split(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  SplitManifest split;
  const fs::path base = path.parent_path();
  std::vector<fs::path>* members = nullptr;
  std::vector<std::uint64_t>* seeds = nullptr;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "[train]") {
      members = &split.train;
      seeds = &split.train_seeds;
    } else if (line == "[test]") {
      members = &split.test;
      seeds = &split.test_seeds;
    } else if (line.rfind("# seed ", 0) == 0) {
      std::uint64_t s = 0;
      if (seeds == nullptr || !parse_field(std::string_view(line).substr(7), s)) malformed(path, lineno, "bad seed line");
      seeds->push_back(s);
    } else if (line.front() == '#') {
      continue;
    } else {
      if (members == nullptr) malformed(path, lineno, "path outside a section");
      members->push_back(base / line);
    }
  }
  if (split.train.empty() || split.test.empty()) malformed(path, lineno, "both [train] and [test] need members");
  return split;
}

}  // namespace qdsim::tracegen
