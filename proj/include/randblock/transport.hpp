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

#include <vector>

#include "randblock/blockspace.hpp"

namespace randblock {

class SplittingMap;

/// Weighted point cloud; weights sum to one.
struct DiscreteMeasure {
  std::vector<Vector> support;
  std::vector<double> weights;

  /// Equal weights 1/N.
  static DiscreteMeasure empirical(std::vector<Vector> points);
  static DiscreteMeasure point_mass(Vector z);

  std::size_t size() const { return support.size(); }
  bool equal_weights() const;
  /// Throws InvalidArgument / DimensionMismatch unless the invariants hold.
  void validate(const BlockLayout& layout) const;
};

/// gamma(a, b) >= 0 with row sums = source weights and column sums = target weights.
struct CouplingPlan {
  Matrix gamma;
};

struct TransportResult {
  double distance = 0.0;
  CouplingPlan plan;
  bool assignment_path = false;
};

/// C(a, b) = ||x_a - y_b||_p^2
Matrix squared_cost_matrix(const BlockLayout& layout, const BlockProbabilities& p,
                           const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct AssignmentSolution {
  std::vector<int> column_of_row;
  double cost = 0.0;
};

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method
/// with potentials, O(n^3)).
AssignmentSolution solve_assignment(const Matrix& cost);

struct TransportationSolution {
  Matrix plan;
  double cost = 0.0;
};

/// Exact transportation LP  min <C, gamma>  s.t. gamma 1 = a, gamma^T 1 = b,
/// gamma >= 0, solved by successive shortest augmenting paths.
TransportationSolution solve_transportation(const Matrix& cost, const std::vector<double>& a,
                                            const std::vector<double>& b);

/// Exact W_{2,p} distance with an optimal plan. Equal-size equal-weight
/// measures go through the assignment solver, everything else through the LP.
TransportResult wasserstein2_weighted(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                      const BlockLayout& layout, const BlockProbabilities& p);

/// W_{2,p}(mu, delta_z)
double distance_to_point_mass(const DiscreteMeasure& mu, const Vector& z,
                              const BlockLayout& layout, const BlockProbabilities& p);

/// Distance from mu to the measures supported on the finite set C:
///   ( sum_a w_a min_{z in C} ||x_a - z||_p^2 )^{1/2}
double distance_to_set_mixture(const DiscreteMeasure& mu, const std::vector<Vector>& c_points,
                               const BlockLayout& layout, const BlockProbabilities& p);

/// ( sum_a w_a ||x_a - T_1 x_a||^2 )^{1/2}. Equals the invariant transport
/// discrepancy for consistent paracontractive problems and bounds it above
/// in general.
double invariant_discrepancy_consistent(const DiscreteMeasure& mu, const SplittingMap& map);

}  // namespace randblock
