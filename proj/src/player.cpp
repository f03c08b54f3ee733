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

#include "qdsim/player.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "qdsim/error.hpp"

namespace qdsim::player {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<double> VideoManifest::bitrates() const {
  std::vector<double> out;
  if (chunks.empty()) return out;
  for (const auto& r : chunks.front().reps) out.push_back(r.bitrate_bps);
  return out;
}

void VideoManifest::validate() const {
  if (!(chunk_duration_s > 0.0)) throw Error(Errc::ConfigInvalid, "chunk duration must be positive");
  if (chunks.empty()) throw Error(Errc::ConfigInvalid, "manifest without chunks");
  const std::size_t reps = chunks.front().reps.size();
  if (reps == 0) throw Error(Errc::ConfigInvalid, "chunk without representations");
  for (std::size_t m = 0; m < chunks.size(); ++m) {
    const auto& c = chunks[m];
    std::ostringstream where;
    where << "chunk " << m << ": ";
    if (c.reps.size() != reps) throw Error(Errc::ConfigInvalid, where.str() + "representation count differs");
    if (!c.z.valid()) throw Error(Errc::ConfigInvalid, where.str() + "invalid rate-quality parameters");
    for (std::size_t l = 0; l < reps; ++l) {
      const auto& r = c.reps[l];
      if (!(r.bitrate_bps > 0.0) || !(r.size_bits > 0.0))
        throw Error(Errc::ConfigInvalid, where.str() + "bitrate and size must be positive");
      if (std::fabs(r.size_bits / (r.bitrate_bps * chunk_duration_s) - 1.0) > 0.2 + 1e-12)
        throw Error(Errc::ConfigInvalid, where.str() + "size deviates from bitrate x duration by more than 20%");
      if (l > 0 && (!(r.bitrate_bps > c.reps[l - 1].bitrate_bps) || !(r.quality_db > c.reps[l - 1].quality_db)))
        throw Error(Errc::ConfigInvalid, where.str() + "representations must increase in bitrate and quality");
    }
  }
}

tracegen::VideoSchedule VideoManifest::schedule() const {
  tracegen::VideoSchedule s;
  s.chunk_duration_s = chunk_duration_s;
  for (const auto& c : chunks) s.chunk_z.push_back(c.z);
  return s;
}

std::string manifest_to_json(const VideoManifest& manifest) {
  json j;
  j["chunk_duration_s"] = manifest.chunk_duration_s;
  json chunks = json::array();
  for (const auto& c : manifest.chunks) {
    json reps = json::array();
    for (const auto& r : c.reps)
      reps.push_back({{"bitrate_bps", r.bitrate_bps}, {"size_bits", r.size_bits}, {"quality_db", r.quality_db}});
    chunks.push_back({{"reps", reps}, {"z", {c.z.z1, c.z.z2, c.z.z3}}});
  }
  j["chunks"] = chunks;
  return j.dump(1);
}

VideoManifest manifest_from_json(const std::string& text) {
  VideoManifest m;
  try {
    const json j = json::parse(text);
    m.chunk_duration_s = j.at("chunk_duration_s").get<double>();
    for (const auto& c : j.at("chunks")) {
      Chunk chunk;
      for (const auto& r : c.at("reps"))
        chunk.reps.push_back({r.at("bitrate_bps").get<double>(), r.at("size_bits").get<double>(),
                              r.at("quality_db").get<double>()});
      const auto& z = c.at("z");
      if (!z.is_array() || z.size() != 3) throw Error(Errc::Malformed, "z must have three entries");
      chunk.z = {z[0].get<double>(), z[1].get<double>(), z[2].get<double>()};
      m.chunks.push_back(std::move(chunk));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::Malformed, std::string("manifest: ") + e.what());
  }
  try {
    m.validate();
  } catch (const Error& e) {
    throw Error(Errc::Malformed, std::string("manifest: ") + e.what());
  }
  return m;
}

VideoManifest read_manifest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return manifest_from_json(ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_manifest(const VideoManifest& manifest, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << manifest_to_json(manifest) << '\n';
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

std::vector<double> default_ladder() { return {0.3e6, 0.75e6, 1.2e6, 1.85e6, 2.85e6, 3.2e6}; }

quality::RQParams profile_params(double q_low, double q_high, double kappa, double bandwidth_hz,
                                 const std::vector<double>& ladder_bps) {
  if (!(q_high > q_low) || !(q_low > 0.0) || !(kappa >= 1.0) || ladder_bps.size() < 2)
    throw Error(Errc::ConfigInvalid, "profile needs 0 < q_low < q_high and kappa >= 1");
  // q(a) = z1 ln(z2 (a + K)) with K = kappa B / ln 2
  const double k = kappa * bandwidth_hz / std::numbers::ln2;
  const double lo = ladder_bps.front() + k;
  const double hi = ladder_bps.back() + k;
  const double z1 = (q_high - q_low) / std::log(hi / lo);
  const double z2 = std::exp(q_low / z1) / lo;
  return {z1, z2, z2 * k};
}

std::vector<VideoProfile> default_profiles(double bandwidth_hz, std::size_t chunks, std::uint64_t seed) {
  const auto ladder = default_ladder();
  const struct {
    const char* name;
    double q_low;
    double q_high;
  } table[] = {{"talk", 33.0, 43.0}, {"documentary", 30.0, 40.0}, {"sports", 27.0, 38.5}};
  std::vector<VideoProfile> out;
  for (std::size_t i = 0; i < std::size(table); ++i) {
    VideoProfile p;
    p.name = table[i].name;
    p.z = profile_params(table[i].q_low, table[i].q_high, 1.2, bandwidth_hz, ladder);
    p.chunks = chunks;
    p.complexity_jitter = 0.15;
    p.seed = seed + i;
    out.push_back(std::move(p));
  }
  return out;
}

VideoManifest synth_manifest(const VideoProfile& profile) {
  if (profile.chunks == 0 || profile.ladder_bps.size() < 3 || !profile.z.valid() ||
      !(profile.size_spread >= 0.0 && profile.size_spread <= 0.2) || !(profile.complexity_jitter >= 0.0))
    throw Error(Errc::ConfigInvalid, "invalid video profile");
  Rng rng(profile.seed);
  std::normal_distribution<double> complexity(0.0, 1.0);
  std::uniform_real_distribution<double> spread(-profile.size_spread, profile.size_spread);

  VideoManifest m;
  m.chunk_duration_s = profile.chunk_duration_s;
  for (std::size_t k = 0; k < profile.chunks; ++k) {
    // complexity scales the curve's argument, shifting quality by z1 ln c
    const double c = std::exp(profile.complexity_jitter * complexity(rng));
    const quality::RQParams truth{profile.z.z1, profile.z.z2 * c, std::max(1.0, profile.z.z3 * c)};
    Chunk chunk;
    std::vector<quality::RatePoint> points;
    for (double a : profile.ladder_bps) {
      const double q = quality::quality_of_bitrate(a, truth);
      const double u = profile.size_spread > 0.0 ? spread(rng) : 0.0;
      chunk.reps.push_back({a, a * profile.chunk_duration_s * (1.0 + u), q});
      points.push_back({a, q});
    }
    chunk.z = quality::fit_rq(points).params;
    m.chunks.push_back(std::move(chunk));
  }
  m.validate();
  return m;
}

Download download_chunk(const RateTrace& trace, double t_start, double size_bits) {
  if (!(size_bits > 0.0)) throw Error(Errc::ConfigInvalid, "chunk size must be positive");
  if (!(t_start >= 0.0)) throw Error(Errc::ConfigInvalid, "download cannot start before the trace");
  const std::size_t n = trace.duration_s();
  double t = t_start;
  double remaining = size_bits;
  auto s = static_cast<std::size_t>(std::floor(t));
  while (true) {
    if (s >= n) throw Error(Errc::TraceExhausted, "trace ended before the chunk completed");
    const double rate = trace.rate_bps[s];
    const double seg_end = static_cast<double>(s + 1);
    const double avail = rate * (seg_end - t);
    if (rate > 0.0 && avail >= remaining) {
      t += remaining / rate;
      break;
    }
    remaining -= avail;
    t = seg_end;
    ++s;
  }
  const double d = t - t_start;
  return {d, size_bits / d};
}

std::pair<ChunkRecord, SessionState> step(const SessionState& state, std::size_t action,
                                          const VideoManifest& manifest, const RateTrace& trace,
                                          const PlayerParams& params) {
  if (state.next_chunk >= manifest.num_chunks()) throw Error(Errc::ConfigInvalid, "no chunk left to request");
  const Chunk& chunk = manifest.chunks[state.next_chunk];
  if (action >= chunk.reps.size()) throw Error(Errc::ConfigInvalid, "representation index out of range");
  const Representation& rep = chunk.reps[action];

  const Download dl = download_chunk(trace, state.time_s, rep.size_bits);
  ChunkRecord rec;
  rec.m = state.next_chunk;
  rec.action = action;
  rec.bitrate_bps = rep.bitrate_bps;
  rec.quality_db = rep.quality_db;
  rec.download_s = dl.duration_s;
  rec.throughput_bps = dl.throughput_bps;
  rec.start_s = state.time_s;
  // startup delay of the first chunk is not a stall
  rec.rebuffer_s = state.next_chunk == 0 ? 0.0 : std::max(0.0, dl.duration_s - state.buffer_s);

  SessionState next = state;
  double b = std::max(0.0, state.buffer_s - dl.duration_s) + manifest.chunk_duration_s;
  if (b > params.buffer_max_s) {
    rec.wait_s = b - params.buffer_max_s;
    b = params.buffer_max_s;
  }
  rec.buffer_s = b;
  const double switching = state.has_last ? std::fabs(rep.quality_db - state.last_quality_db) : 0.0;
  rec.qoe = rep.quality_db - params.switch_penalty * switching - params.rebuffer_penalty * rec.rebuffer_s;

  next.next_chunk = state.next_chunk + 1;
  next.buffer_s = b;
  next.time_s = state.time_s + dl.duration_s + rec.wait_s;
  next.last_quality_db = rep.quality_db;
  next.has_last = true;
  next.throughput_bps.push_back(dl.throughput_bps);
  next.download_time_s.push_back(dl.duration_s);
  while (next.throughput_bps.size() > params.history) {
    next.throughput_bps.pop_front();
    next.download_time_s.pop_front();
  }
  return {rec, next};
}

abr::Observation observe(const SessionState& state, const VideoManifest& manifest, const PlayerParams& params) {
  abr::Observation obs;
  const std::size_t pad = params.history - std::min(params.history, state.throughput_bps.size());
  obs.throughput_bps.assign(pad, 0.0);
  obs.download_time_s.assign(pad, 0.0);
  const std::size_t skip = state.throughput_bps.size() - (params.history - pad);
  for (std::size_t k = skip; k < state.throughput_bps.size(); ++k) {
    obs.throughput_bps.push_back(state.throughput_bps[k]);
    obs.download_time_s.push_back(state.download_time_s[k]);
  }
  const std::size_t next = std::min(state.next_chunk, manifest.num_chunks() - 1);
  const Chunk& chunk = manifest.chunks[next];
  obs.next_z = chunk.z;
  for (const auto& r : chunk.reps) {
    obs.next_quality_db.push_back(r.quality_db);
    obs.next_size_bits.push_back(r.size_bits);
  }
  obs.bitrates_bps = manifest.bitrates();
  obs.buffer_s = state.buffer_s;
  obs.buffer_max_s = params.buffer_max_s;
  obs.chunk_duration_s = manifest.chunk_duration_s;
  obs.total_chunks = manifest.num_chunks();
  obs.remaining_chunks = manifest.num_chunks() - std::min(state.next_chunk, manifest.num_chunks());
  obs.last_quality_db = state.has_last ? state.last_quality_db : 0.0;
  return obs;
}

SessionSummary summarize(const std::vector<ChunkRecord>& records) {
  SessionSummary s;
  s.chunks = records.size();
  if (records.empty()) return s;
  for (std::size_t k = 0; k < records.size(); ++k) {
    s.mean_qoe += records[k].qoe;
    s.mean_quality_db += records[k].quality_db;
    if (k > 0) s.mean_abs_switch_db += std::fabs(records[k].quality_db - records[k - 1].quality_db);
    s.total_rebuffer_s += records[k].rebuffer_s;
  }
  const auto n = static_cast<double>(records.size());
  s.mean_qoe /= n;
  s.mean_quality_db /= n;
  s.mean_abs_switch_db /= n;
  return s;
}

Session run_session(const RateTrace& trace, const VideoManifest& manifest, const abr::Policy& policy,
                    const PlayerParams& params) {
  Session session;
  SessionState state;
  while (state.next_chunk < manifest.num_chunks()) {
    const std::size_t action = policy.decide(observe(state, manifest, params));
    try {
      auto [rec, next] = step(state, action, manifest, trace, params);
      session.records.push_back(rec);
      state = std::move(next);
    } catch (const Error& e) {
      if (e.code() != Errc::TraceExhausted) throw;
      session.trace_exhausted = true;
      break;
    }
  }
  session.summary = summarize(session.records);
  session.final_state = std::move(state);
  return session;
}

void write_session_csv(const std::vector<ChunkRecord>& records, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << "m,bitrate_bps,quality_db,rebuffer_s,wait_s,qoe\n";
  char buf[256];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.m, r.bitrate_bps, r.quality_db,
                  r.rebuffer_s, r.wait_s, r.qoe);
    out << buf;
  }
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

}  // namespace qdsim::player
