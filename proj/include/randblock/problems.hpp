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

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "randblock/blockspace.hpp"
#include "randblock/operators.hpp"
#include "randblock/regularity.hpp"
#include "randblock/splitting.hpp"

namespace randblock {

/// A concrete instance of  f(x) + sum_j h_j(x_j)  with known solutions.
struct ProblemSpec {
  std::string id;
  BlockLayout layout;
  std::shared_ptr<const SmoothCoupling> coupling;
  SeparableTerm terms;
  /// Suggested global step for experiments.
  double default_step = 0.25;
  /// Points fixed by every forward-backward T_i at any admissible step.
  std::vector<Vector> fb_fixed_points;
  /// Points fixed by every Douglas-Rachford T_i at any step. Empty when the
  /// fixed points depend on the step.
  std::vector<Vector> dr_fixed_points;
  /// Reference minimizers of f + sum_j h_j.
  std::vector<Vector> critical_points;
  bool convex = true;
  bool consistent = true;
  /// Best approximation pair for inconsistent two-set feasibility.
  std::optional<std::pair<Vector, Vector>> best_approximation_pair;
  PairRegion region;
  std::string description;

  const std::vector<Vector>& fixed_points(Flavor flavor) const {
    return flavor == Flavor::ForwardBackward ? fb_fixed_points : dr_fixed_points;
  }

  SplittingMap make_map(Flavor flavor, StepSchedule steps, BlockSubsetScheme scheme,
                        InnerSolveOptions inner = {}) const;
  SplittingMap make_map(Flavor flavor, double step, BlockSubsetScheme scheme) const;
};

/// f(x1, x2) = (x1 + x2)^2, h1 = 0, h2(x2) = x2^2 with one-dimensional blocks.
ProblemSpec counterexample2d(double t = 0.25);

/// Minimizer (-z, z) of f + h over the line R x {z} of the counterexample
/// when only block 1 moves.
Vector counterexample_line_minimizer(double z);

/// Closed set descriptor for the feasibility gallery.
struct SetDescriptor {
  /// "point", "box", "ball" or "line".
  std::string kind;
  /// point, box lower corner, ball center or a point on the line.
  Vector a;
  /// box upper corner or line direction.
  Vector b;
  double radius = 0.0;

  static SetDescriptor point(Vector p);
  static SetDescriptor box(Vector lo, Vector hi);
  static SetDescriptor ball(Vector center, double radius);
  static SetDescriptor line(Vector point, Vector direction);

  std::shared_ptr<const ConvexSet> make() const;
  int dim() const { return static_cast<int>(a.size()); }
};

enum class FeasibilityCoupling { SquaredDistance, DiagonalIndicator };

std::string to_string(FeasibilityCoupling kind);
FeasibilityCoupling feasibility_coupling_from_string(const std::string& name);

/// A point of both sets when they intersect, computed in closed form.
/// Throws UnsupportedSet for unknown descriptors.
std::optional<Vector> intersection_point(const SetDescriptor& s1, const SetDescriptor& s2);

/// Product-space problem h_j = indicator of set j, f = 1/2 d(x, D)^2 or the
/// indicator of the diagonal D.
ProblemSpec feasibility(const SetDescriptor& s1, const SetDescriptor& s2,
                        FeasibilityCoupling coupling = FeasibilityCoupling::SquaredDistance);

/// f = 1/2 x^T Q x + b^T x, h_j = lambda_j ||x_j||_1. Throws NotPSD when Q has
/// a negative eigenvalue.
ProblemSpec quadratic_l1(const Matrix& q, const Vector& b, const std::vector<double>& lambda,
                         const BlockLayout& layout);

}  // namespace randblock
