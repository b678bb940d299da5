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

#include "randblock/markov.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <thread>

#include "randblock/errors.hpp"

namespace randblock {

namespace {

template <class Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n < 2 * workers) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

UniformBoxSampler::UniformBoxSampler(Vector lo, Vector hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size()) throw DimensionMismatch("sampler box bounds differ in length");
  if ((lo_.array() > hi_.array()).any()) throw InvalidArgument("sampler box has lo > hi");
}

Vector UniformBoxSampler::sample(Rng& rng) const {
  Vector x(lo_.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(lo_[i], hi_[i]);
  return x;
}

DiscreteSampler::DiscreteSampler(DiscreteMeasure mu) : mu_(std::move(mu)) {
  if (mu_.support.empty()) throw InvalidArgument("discrete sampler needs support points");
  cumulative_.resize(mu_.weights.size());
  std::partial_sum(mu_.weights.begin(), mu_.weights.end(), cumulative_.begin());
}

Vector DiscreteSampler::sample(Rng& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  auto i = static_cast<std::size_t>(it - cumulative_.begin());
  return mu_.support[std::min(i, mu_.size() - 1)];
}

int DiscreteSampler::dim() const { return static_cast<int>(mu_.support.front().size()); }

std::vector<Vector> Ensemble::states() const {
  std::vector<Vector> out;
  out.reserve(chains.size());
  for (const auto& c : chains) out.push_back(c.state);
  return out;
}

DiscreteMeasure Ensemble::measure() const { return DiscreteMeasure::empirical(states()); }

Ensemble init_ensemble(const BlockLayout& layout, const InitialSampler& sampler, std::size_t n,
                       std::uint64_t master_seed) {
  if (n < 1) throw InvalidArgument("ensemble needs at least one chain");
  if (sampler.dim() != layout.total_dim()) {
    throw DimensionMismatch("initial sampler dimension does not match the layout");
  }
  Ensemble e;
  e.seed = master_seed;
  e.chains.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng init(master_seed, i, 0);
    e.chains[i].state = sampler.sample(init);
    e.chains[i].rng = Rng(master_seed, i, 1);
    e.chains[i].id = i;
  }
  return e;
}

void sbi_step(Ensemble& ensemble, const SplittingMap& map, int threads) {
  parallel_for(ensemble.size(), threads, [&](std::size_t c) {
    Chain& chain = ensemble.chains[c];
    const std::size_t i = sample_subset(map.scheme(), chain.rng);
    chain.state = map.apply(i, chain.state);
  });
  ++ensemble.k;
}

double empirical_residual_psi(const Ensemble& ensemble, const SplittingMap& map) {
  double s = 0.0;
  for (const auto& c : ensemble.chains) s += (c.state - map.apply_full(c.state)).squaredNorm();
  return std::sqrt(s / static_cast<double>(ensemble.size()));
}

namespace {

DiagnosticRecord diagnose(const Ensemble& e, const SplittingMap& map, const RunOptions& opt) {
  const std::size_t n = e.size();
  std::vector<double> residual(n);
  parallel_for(n, opt.threads, [&](std::size_t c) {
    residual[c] = (e.chains[c].state - map.apply_full(e.chains[c].state)).norm();
  });
  DiagnosticRecord r;
  r.k = e.k;
  r.mean_state = Vector::Zero(map.layout().total_dim());
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    r.mean_state += e.chains[c].state;
    sum += residual[c];
    sum_sq += residual[c] * residual[c];
    r.max_residual = std::max(r.max_residual, residual[c]);
  }
  r.mean_state /= static_cast<double>(n);
  r.mean_residual = sum / static_cast<double>(n);
  r.psi_upper = std::sqrt(sum_sq / static_cast<double>(n));
  if (!opt.targets.empty()) {
    r.dw_target = distance_to_set_mixture(e.measure(), opt.targets, map.layout(), map.block_probs());
  }
  return r;
}

}  // namespace

Trajectory run(Ensemble& ensemble, const SplittingMap& map, const RunOptions& options) {
  Trajectory traj;
  const std::size_t k0 = ensemble.k;
  traj.records.push_back(diagnose(ensemble, map, options));
  traj.snapshots.push_back({ensemble.k, ensemble.states()});
  for (std::size_t step = 0; step < options.iterations; ++step) {
    const bool want_dw = options.dw_every > 0 && step % options.dw_every == 0;
    std::vector<Vector> before;
    if (want_dw) before = ensemble.states();
    sbi_step(ensemble, map, options.threads);
    if (want_dw) {
      traj.records.back().dw_step =
          wasserstein2_weighted(DiscreteMeasure::empirical(std::move(before)), ensemble.measure(),
                                map.layout(), map.block_probs())
              .distance;
    }
    traj.records.push_back(diagnose(ensemble, map, options));
    const std::size_t done = step + 1;
    const bool last = done == options.iterations;
    if (last || (options.snapshot_every > 0 && done % options.snapshot_every == 0)) {
      traj.snapshots.push_back({k0 + done, ensemble.states()});
    }
  }
  return traj;
}

DeterministicRun iterate_full_map(const SplittingMap& map, Vector x0, std::size_t max_iter,
                                  double tol) {
  DeterministicRun out;
  out.point = std::move(x0);
  for (; out.iterations < max_iter; ++out.iterations) {
    Vector next = map.apply_full(out.point);
    out.residual = (next - out.point).norm();
    out.point = std::move(next);
    if (out.residual <= tol) {
      ++out.iterations;
      break;
    }
  }
  return out;
}

ReachableChain enumerate_reachable(const SplittingMap& map, const Vector& seed, double merge_tol,
                                   std::size_t max_states) {
  const auto& scheme = map.scheme();
  ReachableChain out;
  std::vector<std::vector<std::pair<std::size_t, double>>> edges;
  auto find_or_add = [&](const Vector& x) -> std::size_t {
    for (std::size_t s = 0; s < out.states.size(); ++s)
      if ((out.states[s] - x).norm() <= merge_tol) return s;
    if (out.states.size() >= max_states) {
      throw SolverFailure("more than " + std::to_string(max_states) +
                          " reachable states; the dynamics are not finite at this tolerance");
    }
    out.states.push_back(x);
    edges.emplace_back();
    return out.states.size() - 1;
  };

  find_or_add(seed);
  for (std::size_t s = 0; s < out.states.size(); ++s) {
    for (std::size_t i = 0; i < scheme.size(); ++i) {
      if (scheme.prob(i) == 0.0) continue;
      const Vector next = map.apply(i, out.states[s]);
      const std::size_t t = find_or_add(next);
      edges[s].emplace_back(t, scheme.prob(i));
    }
  }

  const auto n = static_cast<Eigen::Index>(out.states.size());
  out.transition = Matrix::Zero(n, n);
  for (Eigen::Index s = 0; s < n; ++s)
    for (const auto& [t, w] : edges[static_cast<std::size_t>(s)])
      out.transition(s, static_cast<Eigen::Index>(t)) += w;

  // Lazy chain (P + I)/2 has the same invariant laws and no periodicity.
  const Matrix lazy = 0.5 * (out.transition + Matrix::Identity(n, n));
  Eigen::RowVectorXd law = Eigen::RowVectorXd::Zero(n);
  law(0) = 1.0;
  for (int it = 0; it < 1000000; ++it) {
    Eigen::RowVectorXd next = law * lazy;
    const double change = (next - law).lpNorm<1>();
    law = next;
    if (change <= 1e-15) break;
  }
  for (Eigen::Index s = 0; s < n; ++s) {
    if (law(s) > 1e-14) {
      out.stationary.support.push_back(out.states[static_cast<std::size_t>(s)]);
      out.stationary.weights.push_back(law(s));
    }
  }
  const double total =
      std::accumulate(out.stationary.weights.begin(), out.stationary.weights.end(), 0.0);
  for (double& w : out.stationary.weights) w /= total;
  return out;
}

}  // namespace randblock
