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

#include "randblock/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "randblock/errors.hpp"
#include "randblock/splitting.hpp"

namespace randblock {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

DiscreteMeasure DiscreteMeasure::empirical(std::vector<Vector> points) {
  DiscreteMeasure mu;
  const double w = points.empty() ? 0.0 : 1.0 / static_cast<double>(points.size());
  mu.weights.assign(points.size(), w);
  mu.support = std::move(points);
  return mu;
}

DiscreteMeasure DiscreteMeasure::point_mass(Vector z) {
  DiscreteMeasure mu;
  mu.support.push_back(std::move(z));
  mu.weights.push_back(1.0);
  return mu;
}

bool DiscreteMeasure::equal_weights() const {
  if (weights.empty()) return false;
  const double w = 1.0 / static_cast<double>(weights.size());
  return std::all_of(weights.begin(), weights.end(),
                     [w](double v) { return std::abs(v - w) <= 1e-15; });
}

void DiscreteMeasure::validate(const BlockLayout& layout) const {
  if (support.empty()) throw InvalidArgument("measure has empty support");
  if (support.size() != weights.size()) {
    throw InvalidArgument("measure has " + std::to_string(support.size()) + " points but " +
                          std::to_string(weights.size()) + " weights");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidArgument("measure weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidArgument("measure weights sum to " + std::to_string(total));
  }
  for (const auto& x : support) layout.check(x, "support point");
}

Matrix squared_cost_matrix(const BlockLayout& layout, const BlockProbabilities& p,
                           const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  Matrix c(static_cast<Eigen::Index>(mu.size()), static_cast<Eigen::Index>(nu.size()));
  for (std::size_t a = 0; a < mu.size(); ++a)
    for (std::size_t b = 0; b < nu.size(); ++b)
      c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          weighted_norm_squared(layout, p, mu.support[a] - nu.support[b]);
  return c;
}

AssignmentSolution solve_assignment(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw InvalidArgument("assignment needs a square cost matrix");
  AssignmentSolution out;
  if (n == 0) return out;

  // 1-based potentials formulation; row 0 / column 0 are sentinels.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      if (j1 == 0) throw SolverFailure("assignment solver found no augmenting column");
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  out.column_of_row.assign(static_cast<std::size_t>(n), -1);
  for (int j = 1; j <= n; ++j) out.column_of_row[match[j] - 1] = j - 1;
  for (int i = 0; i < n; ++i) out.cost += cost(i, out.column_of_row[i]);
  return out;
}

TransportationSolution solve_transportation(const Matrix& cost, const std::vector<double>& a,
                                            const std::vector<double>& b) {
  const int n = static_cast<int>(cost.rows());
  const int m = static_cast<int>(cost.cols());
  if (static_cast<int>(a.size()) != n || static_cast<int>(b.size()) != m) {
    throw DimensionMismatch("transportation marginals do not match the cost matrix");
  }
  if ((cost.array() < 0.0).any()) throw InvalidArgument("transportation costs must be >= 0");
  constexpr double eps = 1e-15;

  TransportationSolution out;
  out.plan = Matrix::Zero(n, m);
  std::vector<double> supply(a), demand(b);
  const int nodes = n + m;
  std::vector<double> pot(nodes, 0.0), dist(nodes);
  std::vector<int> prev(nodes);
  std::vector<char> done(nodes);

  const std::size_t max_rounds = 4 * static_cast<std::size_t>(nodes) * nodes + 16;
  for (std::size_t round = 0; round < max_rounds; ++round) {
    bool any_supply = false;
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(prev.begin(), prev.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (int s = 0; s < n; ++s) {
      if (supply[s] > eps) {
        dist[s] = 0.0;
        any_supply = true;
      }
    }
    if (!any_supply) break;

    // Dense Dijkstra on reduced costs. Forward arcs source->sink always exist;
    // backward arcs sink->source exist where flow is positive.
    for (int iter = 0; iter < nodes; ++iter) {
      int u = -1;
      for (int w = 0; w < nodes; ++w)
        if (!done[w] && dist[w] < kInf && (u < 0 || dist[w] < dist[u])) u = w;
      if (u < 0) break;
      done[u] = 1;
      if (u < n) {
        for (int t = 0; t < m; ++t) {
          const double nd = dist[u] + std::max(0.0, cost(u, t) + pot[u] - pot[n + t]);
          if (nd < dist[n + t]) {
            dist[n + t] = nd;
            prev[n + t] = u;
          }
        }
      } else {
        const int t = u - n;
        for (int s = 0; s < n; ++s) {
          if (out.plan(s, t) <= eps) continue;
          const double nd = dist[u] + std::max(0.0, -cost(s, t) + pot[u] - pot[s]);
          if (nd < dist[s]) {
            dist[s] = nd;
            prev[s] = u;
          }
        }
      }
    }

    int target = -1;
    for (int t = 0; t < m; ++t)
      if (demand[t] > eps && dist[n + t] < kInf && (target < 0 || dist[n + t] < dist[n + target]))
        target = t;
    if (target < 0) break;  // leftover is rounding mismatch between the marginals

    const double dt = dist[n + target];
    for (int w = 0; w < nodes; ++w) pot[w] += std::min(dist[w], dt);

    double bottleneck = demand[target];
    int w = n + target;
    int origin = -1;
    while (true) {
      const int pw = prev[w];
      if (pw < 0) {
        origin = w;
        break;
      }
      if (pw >= n) bottleneck = std::min(bottleneck, out.plan(w, pw - n));  // backward arc
      w = pw;
    }
    bottleneck = std::min(bottleneck, supply[origin]);
    w = n + target;
    while (prev[w] >= 0) {
      const int pw = prev[w];
      if (pw < n) {
        out.plan(pw, w - n) += bottleneck;
      } else {
        out.plan(w, pw - n) -= bottleneck;
        if (out.plan(w, pw - n) < eps) out.plan(w, pw - n) = 0.0;
      }
      w = pw;
    }
    supply[origin] -= bottleneck;
    demand[target] -= bottleneck;
    if (round + 1 == max_rounds) throw SolverFailure("transportation solver did not terminate");
  }
  out.cost = (out.plan.array() * cost.array()).sum();
  return out;
}

TransportResult wasserstein2_weighted(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                      const BlockLayout& layout, const BlockProbabilities& p) {
  mu.validate(layout);
  nu.validate(layout);
  const Matrix cost = squared_cost_matrix(layout, p, mu, nu);
  TransportResult out;
  if (mu.size() == nu.size() && mu.equal_weights() && nu.equal_weights()) {
    const auto sol = solve_assignment(cost);
    const auto n = static_cast<Eigen::Index>(mu.size());
    out.plan.gamma = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) out.plan.gamma(i, sol.column_of_row[i]) = 1.0 / n;
    out.distance = std::sqrt(std::max(0.0, sol.cost / static_cast<double>(n)));
    out.assignment_path = true;
    return out;
  }
  auto sol = solve_transportation(cost, mu.weights, nu.weights);
  out.plan.gamma = std::move(sol.plan);
  out.distance = std::sqrt(std::max(0.0, sol.cost));
  return out;
}

double distance_to_point_mass(const DiscreteMeasure& mu, const Vector& z,
                              const BlockLayout& layout, const BlockProbabilities& p) {
  return distance_to_set_mixture(mu, {z}, layout, p);
}

double distance_to_set_mixture(const DiscreteMeasure& mu, const std::vector<Vector>& c_points,
                               const BlockLayout& layout, const BlockProbabilities& p) {
  mu.validate(layout);
  if (c_points.empty()) throw InvalidArgument("target set is empty");
  double s = 0.0;
  for (std::size_t a = 0; a < mu.size(); ++a) {
    double best = kInf;
    for (const auto& z : c_points)
      best = std::min(best, weighted_norm_squared(layout, p, mu.support[a] - z));
    s += mu.weights[a] * best;
  }
  return std::sqrt(s);
}

double invariant_discrepancy_consistent(const DiscreteMeasure& mu, const SplittingMap& map) {
  mu.validate(map.layout());
  double s = 0.0;
  for (std::size_t a = 0; a < mu.size(); ++a)
    s += mu.weights[a] * (mu.support[a] - map.apply_full(mu.support[a])).squaredNorm();
  return std::sqrt(s);
}

}  // namespace randblock
