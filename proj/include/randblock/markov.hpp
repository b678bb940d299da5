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
#include <memory>
#include <optional>
#include <vector>

#include "randblock/blockspace.hpp"
#include "randblock/rng.hpp"
#include "randblock/splitting.hpp"
#include "randblock/transport.hpp"

namespace randblock {

/// Law mu_0 of X_0.
class InitialSampler {
 public:
  virtual ~InitialSampler() = default;
  virtual Vector sample(Rng& rng) const = 0;
  virtual int dim() const = 0;
};

class PointMassSampler final : public InitialSampler {
 public:
  explicit PointMassSampler(Vector x) : x_(std::move(x)) {}
  Vector sample(Rng&) const override { return x_; }
  int dim() const override { return static_cast<int>(x_.size()); }

 private:
  Vector x_;
};

class UniformBoxSampler final : public InitialSampler {
 public:
  UniformBoxSampler(Vector lo, Vector hi);
  Vector sample(Rng& rng) const override;
  int dim() const override { return static_cast<int>(lo_.size()); }
  Vector center() const { return 0.5 * (lo_ + hi_); }

 private:
  Vector lo_, hi_;
};

/// Draws support points of a discrete measure with their weights.
class DiscreteSampler final : public InitialSampler {
 public:
  explicit DiscreteSampler(DiscreteMeasure mu);
  Vector sample(Rng& rng) const override;
  int dim() const override;

 private:
  DiscreteMeasure mu_;
  std::vector<double> cumulative_;
};

/// One realization of the chain X_{k+1} = T_{xi_k} X_k.
struct Chain {
  Vector state;
  Rng rng;  // stream of the xi_k draws
  std::uint64_t id = 0;
};

/// N independent chains; their states form the empirical law of X_k.
struct Ensemble {
  std::vector<Chain> chains;
  std::size_t k = 0;
  std::uint64_t seed = 0;

  std::size_t size() const { return chains.size(); }
  std::vector<Vector> states() const;
  DiscreteMeasure measure() const;
};

/// Chain i draws X_0 from lane 0 of stream (seed, i) and the block subsets
/// from lane 1, so the initial law and the index sequence are independent.
Ensemble init_ensemble(const BlockLayout& layout, const InitialSampler& sampler, std::size_t n,
                       std::uint64_t master_seed);

/// Each chain draws xi_k and applies T_{xi_k}; the iteration counter advances.
void sbi_step(Ensemble& ensemble, const SplittingMap& map, int threads = 1);

/// ( (1/N) sum ||x - T_1 x||^2 )^{1/2}
double empirical_residual_psi(const Ensemble& ensemble, const SplittingMap& map);

struct DiagnosticRecord {
  std::size_t k = 0;
  Vector mean_state;
  double mean_residual = 0.0;  // mean of ||x - T_1 x||
  double max_residual = 0.0;
  double psi_upper = 0.0;
  std::optional<double> dw_step;    // W_{2,p}(mu_k, mu_{k+1})
  std::optional<double> dw_target;  // W_{2,p}(mu_k, measures on the targets)
};

struct Snapshot {
  std::size_t k = 0;
  std::vector<Vector> particles;
};

struct RunOptions {
  std::size_t iterations = 0;
  /// Extra snapshots every this many iterations (0: only first and last).
  std::size_t snapshot_every = 0;
  /// Exact W2 step distance every this many iterations (0: never).
  std::size_t dw_every = 0;
  /// Target set for dw_target; empty disables it.
  std::vector<Vector> targets;
  int threads = 1;
};

struct Trajectory {
  std::vector<DiagnosticRecord> records;
  std::vector<Snapshot> snapshots;
};

Trajectory run(Ensemble& ensemble, const SplittingMap& map, const RunOptions& options);

/// Deterministic iteration of T_1 until ||x - T_1 x|| <= tol.
struct DeterministicRun {
  Vector point;
  double residual = 0.0;
  std::size_t iterations = 0;
};

DeterministicRun iterate_full_map(const SplittingMap& map, Vector x0, std::size_t max_iter,
                                  double tol);

/// Finite Markov chain obtained by exhaustively applying every T_i to the
/// states reachable from a seed (states closer than merge_tol are identified).
struct ReachableChain {
  std::vector<Vector> states;
  Matrix transition;           // row-stochastic
  DiscreteMeasure stationary;  // limit law of the chain started at the seed
};

/// Throws SolverFailure when more than max_states states are reachable.
ReachableChain enumerate_reachable(const SplittingMap& map, const Vector& seed,
                                   double merge_tol = 1e-9, std::size_t max_states = 4096);

}  // namespace randblock
