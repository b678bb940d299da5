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

// Command-line driver: run | certify | rate | transport.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "randblock/app.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCertificationFailed = 1;
constexpr int kExitUsage = 2;

randblock::ExperimentConfig config_with_overrides(const std::string& path,
                                                  std::optional<std::uint64_t> seed,
                                                  std::optional<int> threads) {
  auto cfg = randblock::load_config(path);
  if (seed || threads) {
    nlohmann::json j = cfg.resolved;
    if (seed) {
      j["seed"] = *seed;
      if (j.contains("certify")) j["certify"]["seed"] = *seed;
    }
    if (threads) j["threads"] = *threads;
    cfg = randblock::parse_config(j);
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic blockwise splitting experiments"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;

  auto* run = app.add_subcommand("run", "Run an ensemble and write trajectory, snapshots and summary");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* certify = app.add_subcommand("certify", "Sampling-based regularity certification");
  certify->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  certify->add_option("--seed", seed, "Override the config seed");
  certify->add_option("--out", out_dir, "Write the report to DIR/certificate.json");

  std::string trajectory, column = "dW_target";
  std::optional<double> kappa, tau;
  double epsilon = 0.0;
  auto* rate = app.add_subcommand("rate", "Rate and monotonicity analysis of a trajectory CSV");
  rate->add_option("--trajectory", trajectory, "trajectory.csv from 'run'")->required()->check(CLI::ExistingFile);
  rate->add_option("--column", column, "Distance column to analyse");
  rate->add_option("--kappa", kappa, "Linear gauge constant");
  rate->add_option("--tau", tau, "Gauge tau");
  rate->add_option("--epsilon", epsilon, "Gauge violation");
  rate->add_option("--config", config_path, "Config supplying the map for the kappa estimate");

  std::vector<std::string> measures;
  std::vector<double> weights;
  std::vector<int> block_dims;
  bool plan = false;
  auto* transport = app.add_subcommand("transport", "Exact W2 distance between two measure files");
  transport->add_option("measures", measures, "Two measure files")->required()->expected(2)->check(CLI::ExistingFile);
  transport->add_option("--weights", weights, "Block weights p_j");
  transport->add_option("--block-dims", block_dims, "Block dimensions");
  transport->add_flag("--plan", plan, "Include the optimal plan");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*run) {
      auto cfg = config_with_overrides(config_path, seed, threads);
      const std::string dir = out_dir.empty() ? cfg.output_dir : out_dir;
      const auto res = randblock::cmd_run(cfg, dir);
      std::cout << res.summary.dump(2) << '\n';
      return kExitOk;
    }
    if (*certify) {
      auto cfg = config_with_overrides(config_path, seed, std::nullopt);
      const auto res = randblock::cmd_certify(cfg);
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        std::ofstream(std::filesystem::path(out_dir) / "certificate.json") << res.json.dump(2) << '\n';
      }
      std::cout << res.json.dump(2) << '\n';
      return res.report.pass ? kExitOk : kExitCertificationFailed;
    }
    if (*rate) {
      randblock::RateOptions opt;
      opt.column = column;
      opt.kappa = kappa;
      opt.tau = tau;
      opt.epsilon = epsilon;
      if (!config_path.empty()) opt.config = randblock::load_config(config_path);
      std::cout << randblock::cmd_rate(trajectory, opt).dump(2) << '\n';
      return kExitOk;
    }
    if (*transport) {
      std::cout << randblock::cmd_transport(measures[0], measures[1], weights, block_dims, plan).dump(2)
                << '\n';
      return kExitOk;
    }
  } catch (const randblock::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
