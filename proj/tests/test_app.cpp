// Copyright 2026 The randblock Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "randblock/app.hpp"
#include "support.hpp"

using namespace randblock;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json base_config() {
  return json::parse(R"({
    "problem": {"id": "counterexample2d", "params": {"t": 0.25}},
    "flavor": "FB",
    "scheme": {"subsets": [[1], [2]], "probabilities": [0.5, 0.5]},
    "steps": 0.25,
    "strict": true,
    "ensemble": {"size": 60, "init": {"kind": "uniform_box", "lo": [-10, -10], "hi": [10, 10]}},
    "iterations": 40,
    "snapshot_every": 20,
    "seed": 7
  })");
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("randblock_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

}  // namespace

TEST_CASE("config validation") {
  const auto c = parse_config(base_config());
  CHECK(c.subsets == std::vector<std::vector<int>>{{0}, {1}});
  CHECK(c.steps == std::vector<double>{0.25, 0.25});

  auto bad_region = base_config();
  bad_region["certify"] = {{"property", "pointwise_aafne"}, {"region", {{"lo", {1, 0}}, {"hi", {0, 1}}}}};
  try {
    parse_config(bad_region);
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("certify.region") != std::string::npos);
  }

  auto bad_step = base_config();
  bad_step["steps"] = 0.4;  // above the strict bound 2 alpha / L = 0.25
  CHECK_THROWS_AS(parse_config(bad_step), ConfigError);
  bad_step["strict"] = false;
  CHECK_NOTHROW(parse_config(bad_step));

  auto bad_probs = base_config();
  bad_probs["scheme"]["probabilities"] = {0.5, 0.6};
  CHECK_THROWS_AS(parse_config(bad_probs), ConfigError);

  auto bad_block = base_config();
  bad_block["scheme"]["subsets"] = {{1}, {3}};
  CHECK_THROWS_AS(parse_config(bad_block), ConfigError);

  auto no_problem = base_config();
  no_problem.erase("problem");
  CHECK_THROWS_AS(parse_config(no_problem), ConfigError);

  auto version = base_config();
  version["schema_version"] = 99;
  CHECK_THROWS_AS(parse_config(version), ConfigError);
}

TEST_CASE("run with zero iterations") {
  auto j = base_config();
  j["iterations"] = 0;
  const auto dir = scratch("k0");
  const auto res = cmd_run(parse_config(j), dir);
  CHECK(res.trajectory.records.size() == 1);
  CHECK(res.summary["initial"] == res.summary["final"]);
  CHECK(fs::exists(dir / "trajectory.csv"));
  CHECK(fs::exists(dir / "snapshot_0.csv"));
  CHECK(fs::exists(dir / "summary.json"));
}

TEST_CASE("run is reproducible and converges") {
  const auto c = parse_config(base_config());
  const auto d1 = scratch("rep1"), d2 = scratch("rep2");
  cmd_run(c, d1);
  const auto res = cmd_run(c, d2);
  CHECK(slurp(d1 / "trajectory.csv") == slurp(d2 / "trajectory.csv"));
  CHECK(slurp(d1 / "snapshot_40.csv") == slurp(d2 / "snapshot_40.csv"));

  auto j = base_config();
  j["iterations"] = 300;
  j["dw_every"] = 10;
  const auto long_run = cmd_run(parse_config(j), scratch("long"));
  CHECK(long_run.summary["final"]["dW_target"].get<double>() <= 1e-3);
  CHECK(long_run.summary["fejer"]["pass"].get<bool>());
  CHECK(long_run.summary["schema_version"] == kSchemaVersion);

  const auto table = read_trajectory(d2 / "trajectory.csv");
  CHECK(table.column("k").size() == 41);
  const auto mu = read_measure(d2 / "snapshot_40.csv");
  CHECK(mu.size() == 60);
}

TEST_CASE("certify on the counterexample") {
  auto j = base_config();
  j["certify"] = {{"property", "pointwise_aafne"}, {"map", 1}, {"alpha", 0.5}, {"epsilon", 0.0},
                  {"n_pairs", 2000}};
  const auto fail = cmd_certify(parse_config(j));
  CHECK(!fail.report.pass);
  CHECK(fail.json.contains("witness"));

  j["certify"] = {{"property", "aafne_in_expectation"}, {"n_pairs", 2000}};
  const auto pass = cmd_certify(parse_config(j));
  CHECK(pass.report.pass);
  CHECK(pass.json["alpha"].get<double>() == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("rate on synthetic trajectories") {
  const auto dir = scratch("rate");
  std::string geo = "k,dW_target\n", flat = "k,dW_target\n";
  double v = 2.0;
  for (int k = 0; k < 40; ++k, v *= 0.6) {
    geo += std::to_string(k) + "," + format_double(v) + "\n";
    flat += std::to_string(k) + ",1\n";
  }
  write_text(dir / "geo.csv", geo);
  write_text(dir / "flat.csv", flat);
  RateOptions o;
  o.kappa = 1.0;
  o.tau = 1.0 - 0.6 * 0.6;
  const auto g = cmd_rate(dir / "geo.csv", o);
  CHECK(std::abs(g["fit"]["rate"].get<double>() - 0.6) <= 1e-10);
  CHECK(g["fejer"]["pass"].get<bool>());
  CHECK(g["gauge_monotone"]["pass"].get<bool>());
  const auto f = cmd_rate(dir / "flat.csv", o);
  CHECK(f["fejer"]["pass"].get<bool>());
  CHECK(!f["gauge_monotone"]["pass"].get<bool>());
  CHECK(f["fit"]["rate"].get<double>() == 1.0);
  CHECK_THROWS_AS(cmd_rate(dir / "missing.csv", o), ConfigError);
}

TEST_CASE("transport between measure files") {
  const auto dir = scratch("transport");
  write_text(dir / "a.csv", "weight,x1\n0.5,0\n0.5,1\n");
  write_text(dir / "b.csv", "weight,x1\n0.5,1\n0.5,2\n");
  write_text(dir / "c.csv", "weight,x1,x2\n1,0,0\n");
  CHECK(cmd_transport(dir / "a.csv", dir / "a.csv", {}, {}, false)["distance"].get<double>() == 0.0);
  CHECK(cmd_transport(dir / "a.csv", dir / "b.csv", {}, {}, false)["distance"].get<double>() ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(cmd_transport(dir / "a.csv", dir / "c.csv", {}, {}, false), DimensionMismatch);
  const auto j = cmd_transport(dir / "a.csv", dir / "b.csv", {}, {}, true);
  CHECK(j["plan"].size() == 2);

  DiscreteMeasure mu;
  mu.support = {testing::vec({0.1, 1.0 / 3}), testing::vec({-2, 5e-300})};
  mu.weights = {0.25, 0.75};
  write_measure(dir / "m.csv", mu, {{"k", 3}});
  const auto back = read_measure(dir / "m.csv");
  CHECK(back.weights == mu.weights);
  CHECK(back.support[0] == mu.support[0]);
  CHECK(back.support[1] == mu.support[1]);
}
