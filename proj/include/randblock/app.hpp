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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "randblock/errors.hpp"
#include "randblock/markov.hpp"
#include "randblock/problems.hpp"
#include "randblock/rates.hpp"
#include "randblock/regularity.hpp"
#include "randblock/splitting.hpp"
#include "randblock/transport.hpp"

namespace randblock {

/// Invalid experiment configuration; the message names the offending field.
class ConfigError : public Error {
  using Error::Error;
};

inline constexpr int kSchemaVersion = 1;

/// Parsed and validated experiment configuration. \c resolved holds the input
/// with every default filled in and is embedded in every report.
struct ExperimentConfig {
  nlohmann::json resolved;

  std::string problem_id;
  nlohmann::json problem_params;
  Flavor flavor = Flavor::ForwardBackward;
  std::vector<std::vector<int>> subsets;  // 0-based
  std::vector<double> probabilities;
  std::vector<double> steps;  // one entry per block
  double alpha_gd = 0.5;
  bool strict = false;

  std::size_t ensemble_size = 100;
  std::string init_kind = "uniform_box";
  Vector init_lo, init_hi, init_point;

  std::size_t iterations = 100;
  std::size_t snapshot_every = 0;
  std::size_t dw_every = 1;
  int threads = 1;
  std::uint64_t seed = 0;

  /// "fixed_points", "none" or an explicit list in \c target_points.
  std::string targets_mode = "fixed_points";
  std::vector<Vector> target_points;
  /// When true the long-run law of the reachable chain is computed and the
  /// final ensemble is compared with it.
  bool reference_enumerate = false;

  nlohmann::json certify;
  std::string output_dir = "out";
};

/// Throws ConfigError with a field-level message on invalid input.
ExperimentConfig parse_config(const nlohmann::json& input);
ExperimentConfig load_config(const std::filesystem::path& path);

ProblemSpec build_problem(const ExperimentConfig& config);
SplittingMap build_map(const ExperimentConfig& config, const ProblemSpec& problem);

struct RunResult {
  Trajectory trajectory;
  nlohmann::json summary;
};

/// Runs the ensemble and writes trajectory.csv, snapshot_<k>.csv and
/// summary.json into \p out_dir.
RunResult cmd_run(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct CertifyResult {
  CertificationReport report;
  nlohmann::json json;
};

CertifyResult cmd_certify(const ExperimentConfig& config);

struct RateOptions {
  std::string column = "dW_target";
  std::optional<double> kappa;
  std::optional<double> tau;
  double epsilon = 0.0;
  /// Supplies a map and C for the kappa estimate.
  std::optional<ExperimentConfig> config;
  std::size_t kappa_samples = 1000;
};

nlohmann::json cmd_rate(const std::filesystem::path& trajectory, const RateOptions& options);

/// W_{2,p} between two measure files. \p p defaults to unit weights with one
/// coordinate per block.
nlohmann::json cmd_transport(const std::filesystem::path& a, const std::filesystem::path& b,
                             const std::vector<double>& block_weights,
                             const std::vector<int>& block_dims, bool include_plan);

/// Measure files: optional '#' comment lines, then rows "weight,x1,...,xn".
DiscreteMeasure read_measure(const std::filesystem::path& path);
void write_measure(const std::filesystem::path& path, const DiscreteMeasure& mu,
                   const nlohmann::json& header);

struct TrajectoryTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;

  std::vector<double> column(const std::string& name) const;
};

TrajectoryTable read_trajectory(const std::filesystem::path& path);

nlohmann::json report_to_json(const CertificationReport& report);

/// "%.17g"
std::string format_double(double v);

}  // namespace randblock
