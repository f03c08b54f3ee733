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
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "qdsim/cli.hpp"
#include "qdsim/error.hpp"

using namespace qdsim;
using namespace qdsim::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Errc error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::Io;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "qdsim");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("default configuration") {
  const RunConfig c;
  CHECK(c.power_budget_w == 4.0);
  CHECK(c.bandwidth_hz == 1e6);
  CHECK(c.noise_power == 1.0);
  CHECK(c.snr_gap == 1.34);
  CHECK(c.doppler_hz == 10.0);
  CHECK(c.slot_s == 0.04);
  CHECK(c.chunk_duration_s == 2.0);
  CHECK(c.buffer_max_s == 30.0);
  CHECK(c.switch_penalty == 0.5);
  CHECK(c.rebuffer_penalty == 4.0);
  CHECK(c.train.actor_lr == 1e-5);
  CHECK(c.train.critic_lr == 1e-4);
  CHECK(c.train.gamma == 0.99);
  CHECK(c.train.entropy_start == 0.5);
  CHECK(c.history == 8);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("configuration round trip") {
  const RunConfig c;
  const auto text = dump_config(c);
  const auto back = config_from_string(text);
  CHECK(dump_config(back) == text);
  CHECK(back.snr_gap == c.snr_gap);
  CHECK(back.train.actor_lr == c.train.actor_lr);
  CHECK(back.train.hidden == c.train.hidden);

  RunConfig d;
  d.train.actor_lr = 1.0 / 3.0;
  d.train.hidden = {32, 16, 8};
  d.train.optimizer = rl::Optimizer::Sgd;
  d.train.serial = true;
  d.scenario = "multicell_mimo";
  d.seed = 123456789012345ULL;
  const auto e = config_from_string(dump_config(d));
  CHECK(e.train.actor_lr == d.train.actor_lr);
  CHECK(e.train.hidden == d.train.hidden);
  CHECK(e.train.optimizer == rl::Optimizer::Sgd);
  CHECK(e.train.serial);
  CHECK(e.scenario == "multicell_mimo");
  CHECK(e.seed == d.seed);
}

TEST_CASE("partial and malformed configurations") {
  const auto c = config_from_string("[player]\nrebuffer_penalty = 6\n\n[run]\nn_train = 5\n");
  CHECK(c.rebuffer_penalty == 6.0);
  CHECK(c.n_train == 5);
  CHECK(c.switch_penalty == 0.5);
  CHECK(error_of([] { config_from_string("[player]\nbogus = 1\n"); }) == Errc::ConfigInvalid);
  CHECK(error_of([] { config_from_string("[player]\nhistory = eight\n"); }) == Errc::ConfigInvalid);
  CHECK(error_of([] { config_from_string("[rl]\nhidden = 64,,64\n"); }) == Errc::ConfigInvalid);
  CHECK(error_of([] { config_from_string("[channel\n"); }) == Errc::ConfigInvalid);
  CHECK(error_of([] { load_config("/nonexistent/run.ini"); }) == Errc::Io);
  RunConfig bad;
  bad.reservoir_s = 20.0;
  CHECK(error_of([&] { bad.validate(); }) == Errc::ConfigInvalid);
  bad = RunConfig{};
  bad.scenario = "three_cells";
  CHECK(error_of([&] { bad.validate(); }) == Errc::ConfigInvalid);
}

TEST_CASE("scheme names") {
  const auto all = parse_schemes("all");
  REQUIRE(all.size() == 6);
  CHECK(all.front().name() == "qddra_drl");
  CHECK(all.back().name() == "wmmse_bb");
  const auto two = parse_schemes("wmmse_rb,qddra_bb");
  REQUIRE(two.size() == 2);
  CHECK(two[0].mode == beamform::Mode::Wmmse);
  CHECK(two[1].abr == Scheme::Abr::Bb);
  CHECK(error_of([] { parse_schemes("qddra_mpc"); }) == Errc::ConfigInvalid);
}

TEST_CASE("scenarios") {
  RunConfig c;
  auto topo = scenario_topology(c);
  CHECK(topo.num_cells() == 1);
  CHECK(topo.num_users() == 4);
  CHECK(topo.cells[0].tx_antennas == 1);
  CHECK(topo.users[0].rx_antennas == 1);
  auto profiles = user_profiles(c);
  REQUIRE(profiles.size() == 4);
  for (const auto& p : profiles) CHECK(p.name == profiles.front().name);

  c.scenario = "multicell_mimo";
  topo = scenario_topology(c);
  CHECK(topo.num_cells() == 4);
  CHECK(topo.num_users() == 12);
  CHECK(topo.cells[2].tx_antennas == 3);
  CHECK(topo.users[5].rx_antennas == 2);
  profiles = user_profiles(c);
  REQUIRE(profiles.size() == 12);
  for (std::size_t cell = 0; cell < 4; ++cell) {
    const auto members = topo.users_in_cell(cell);
    REQUIRE(members.size() == 3);
    CHECK(profiles[members[0]].name != profiles[members[1]].name);
    CHECK(profiles[members[1]].name != profiles[members[2]].name);
    CHECK(profiles[members[0]].name != profiles[members[2]].name);
  }
}

TEST_CASE("Jain fairness") {
  const std::vector<double> even{2.0, 2.0, 2.0};
  CHECK(jain_fairness(even).jain == doctest::Approx(1.0));
  CHECK(jain_fairness(even).unfairness == doctest::Approx(0.0).epsilon(1e-7));
  const std::vector<double> one{1.0, 0.0, 0.0, 0.0};
  CHECK(jain_fairness(one).jain == doctest::Approx(0.25));
  CHECK(jain_fairness(one).unfairness == doctest::Approx(std::sqrt(0.75)));
  CHECK(error_of([] { jain_fairness(std::vector<double>{}); }) == Errc::EmptyOrAllZero);
  CHECK(error_of([] { jain_fairness(std::vector<double>{0.0, 0.0}); }) == Errc::EmptyOrAllZero);
  CHECK(error_of([] { jain_fairness(std::vector<double>{1.0, -1.0}); }) == Errc::ConfigInvalid);

  RunConfig c;
  c.scenario = "multicell_mimo";
  const auto topo = scenario_topology(c);
  // cells equal inside, different across
  std::vector<double> per_user(12);
  for (std::size_t u = 0; u < 12; ++u) per_user[u] = 1.0 + static_cast<double>(topo.users[u].cell);
  CHECK(intra_cell_unfairness(per_user, topo) == doctest::Approx(0.0).epsilon(1e-7));
  CHECK(total_unfairness(per_user) > 0.1);
  CHECK(error_of([&] { intra_cell_unfairness(even, topo); }) == Errc::ShapeMismatch);

  std::vector<tracegen::RateTrace> rates{{0, {1.0, 3.0}}, {1, {2.0, 2.0}}};
  CHECK(rate_unfairness(rates) == doctest::Approx(0.0).epsilon(1e-7));
}

TEST_CASE("pipeline smoke run") {
  const auto root = fs::temp_directory_path() / "qdsim_cli_test";
  fs::remove_all(root);
  const std::string out = (root / "run").string();
  const std::vector<std::string> common{"--out", out, "--duration", "10", "--n-train", "2", "--n-test", "2"};
  auto with = [&](std::string cmd, std::vector<std::string> extra = {}) {
    std::vector<std::string> a{cmd};
    a.insert(a.end(), common.begin(), common.end());
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  };
  CHECK(run(with("evaluate")) == 2);  // nothing generated yet
  REQUIRE(run(with("gen-traces")) == 0);
  CHECK(fs::exists(root / "run" / "traces" / "qddra" / "split.txt"));
  CHECK(fs::exists(root / "run" / "traces" / "wmmse" / "test_001.csv"));
  CHECK(run(with("evaluate", {"--scheme", "qddra_drl"})) == 2);  // no checkpoint yet
  REQUIRE(run(with("train", {"--episodes", "20", "--serial"})) == 0);
  CHECK(fs::exists(root / "run" / "models" / "qddra" / "checkpoint.json"));
  std::ifstream curve(root / "run" / "models" / "wmmse" / "curve.csv");
  std::string header;
  std::getline(curve, header);
  CHECK(header == "episode,mean_qoe,entropy_coef");

  REQUIRE(run(with("evaluate")) == 0);
  const auto summary = slurp(root / "run" / "eval" / "summary.csv");
  int lines = 0;
  for (char ch : summary) lines += ch == '\n';
  CHECK(lines == 7);
  // one CDF sample per (user, trace)
  const auto cdf = slurp(root / "run" / "eval" / "qddra_bb" / "cdf.csv");
  lines = 0;
  for (char ch : cdf) lines += ch == '\n';
  CHECK(lines == 1 + 4 * 2);
  CHECK(fs::exists(root / "run" / "eval" / "wmmse_rb" / "chunks_user0.csv"));

  REQUIRE(run(with("report")) == 0);
  const auto first = slurp(root / "run" / "report" / "schemes.csv");
  CHECK(first == summary);
  REQUIRE(run(with("evaluate")) == 0);
  REQUIRE(run(with("report")) == 0);
  CHECK(slurp(root / "run" / "report" / "schemes.csv") == first);
  CHECK(slurp(root / "run" / "eval" / "summary.csv") == summary);

  // resume continues the episode count
  const auto ckpt = (root / "run" / "models" / "qddra" / "checkpoint.json").string();
  fs::copy_file(ckpt, root / "start.json");
  REQUIRE(run(with("train", {"--episodes", "5", "--serial", "--scheme", "qddra_drl", "--resume",
                             (root / "start.json").string()})) == 0);
  CHECK(rl::read_checkpoint(ckpt).episodes_done == 25);

  const auto dumped = load_config(root / "run" / "train.config.ini");
  CHECK(dumped.train.episodes == 5);
  CHECK(dumped.duration_s == 10.0);

  CHECK(run({"train", "--scheme", "bogus"}) == 1);
  CHECK(run({"frobnicate"}) == 1);
  CHECK(run({"report", "--config", "/nonexistent.ini"}) == 2);
  fs::remove_all(root);
}
