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

#include <algorithm>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "randblock/blockspace.hpp"
#include "randblock/rng.hpp"

namespace testing {

using randblock::Matrix;
using randblock::Vector;

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

inline Vector random_vector(randblock::Rng& rng, int n, double lo = -1.0, double hi = 1.0) {
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

/// Six-term expansion of ||(x - xp) - (x0 - x0p)||^2, written out term by term.
inline double psi_six_term(const Vector& x, const Vector& x0, const Vector& xp, const Vector& x0p) {
  return (xp - x).squaredNorm() + (x0p - x0).squaredNorm() + (xp - x0p).squaredNorm() +
         (x - x0).squaredNorm() - (xp - x0).squaredNorm() - (x - x0p).squaredNorm();
}

/// Minimum over all n! matchings of sum_a cost(a, sigma(a)).
inline double brute_force_assignment(const Matrix& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (int a = 0; a < n; ++a) s += cost(a, perm[static_cast<std::size_t>(a)]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Random scheme over m blocks that covers every block.
inline randblock::BlockSubsetScheme random_scheme(randblock::Rng& rng, int m,
                                                  bool include_full = false) {
  std::vector<std::vector<int>> subsets;
  auto add = [&](std::vector<int> s) {
    std::sort(s.begin(), s.end());
    if (!s.empty() && std::find(subsets.begin(), subsets.end(), s) == subsets.end())
      subsets.push_back(std::move(s));
  };
  if (include_full) {
    std::vector<int> all(static_cast<std::size_t>(m));
    std::iota(all.begin(), all.end(), 0);
    add(all);
  }
  for (int j = 0; j < m; ++j) add({j});
  const int extra = 1 + static_cast<int>(rng.next_u64() % 3);
  for (int e = 0; e < extra; ++e) {
    std::vector<int> s;
    for (int j = 0; j < m; ++j)
      if (rng.uniform() < 0.5) s.push_back(j);
    add(s);
  }
  std::vector<double> w;
  for (std::size_t i = 0; i < subsets.size(); ++i) w.push_back(0.2 + rng.uniform());
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;
  // Renormalize the last entry so the weights sum to one in floating point.
  w.back() = 1.0 - std::accumulate(w.begin(), w.end() - 1, 0.0);
  return randblock::BlockSubsetScheme(m, subsets, w);
}

}  // namespace testing
