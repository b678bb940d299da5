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
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "randblock/blockspace.hpp"
#include "randblock/rng.hpp"
#include "randblock/splitting.hpp"

namespace randblock {

/// Box from which pairs (x, y) are drawn. Coordinates listed in \c tied get
/// the same value in x and y, which restricts pairs to affine slices such as
/// R x {z}.
struct PairRegion {
  Vector lo;
  Vector hi;
  std::vector<int> tied;

  static PairRegion box(int dim, double lo, double hi);

  int dim() const { return static_cast<int>(lo.size()); }
  void validate() const;
  Vector sample_point(Rng& rng) const;
  std::pair<Vector, Vector> sample_pair(Rng& rng) const;
};

struct Witness {
  Vector x;
  Vector y;
};

/// Outcome of a sampling-based check. A pass means no violation was found on
/// the samples; it is not a proof.
struct CertificationReport {
  std::string property;
  double alpha = 0.0;
  double epsilon = 0.0;
  std::size_t samples = 0;
  std::size_t eligible = 0;
  /// Largest signed margin; positive values violate the inequality.
  double max_margin = -std::numeric_limits<double>::infinity();
  std::optional<Witness> witness;
  double tolerance = 0.0;
  bool pass = true;
  /// Extra numbers worth reporting, e.g. the expansion ratio at the witness.
  std::vector<std::pair<std::string, double>> details;

  std::string verdict_text() const;
};

struct CertifyOptions {
  std::size_t n_pairs = 10000;
  std::uint64_t seed = 0;
  bool refine = true;
  int refine_steps = 50;
  std::size_t refine_starts = 8;
  double tolerance = 1e-10;
};

using MapFn = std::function<Vector(const Vector&)>;

/// [ ||Tx - Ty||^2 - (1 + eps) ||x - y||^2 + (1 - alpha)/alpha psi ] / max(1, ||x - y||^2)
double pointwise_aafne_margin(const MapFn& map, const Vector& x, const Vector& y, double alpha,
                              double epsilon);

CertificationReport certify_pointwise_aafne(const MapFn& map, const PairRegion& region,
                                            double alpha, double epsilon,
                                            const CertifyOptions& options = {});

/// Same inequality with exact expectations over the scheme in the p-weighted norm.
double expectation_aafne_margin(const SplittingMap& map, const Vector& x, const Vector& y,
                                double alpha, double epsilon);

CertificationReport certify_aafne_in_expectation(const SplittingMap& map, const PairRegion& region,
                                                 double alpha, double epsilon,
                                                 const CertifyOptions& options = {});

/// Checks E||T_xi x - y||_p < ||x - y||_p for sampled x with ||x - T_1 x|| above
/// \p residual_threshold and every y in C. Margins are E||T_xi x - y||_p / ||x - y||_p - 1.
/// Throws InvalidFixedPoints when some point of C is moved by a T_i.
CertificationReport certify_paracontraction_in_expectation(
    const SplittingMap& map, const std::vector<Vector>& c_points, const PairRegion& region,
    const CertifyOptions& options = {}, double residual_threshold = 1e-8);

/// The two finite-sum identities
///   sum_i eta_i ||T_i x - T_i y||_p^2 = ||T_1 x - T_1 y||^2 - ||x - y||^2 + ||x - y||_p^2
///   sum_i eta_i psi_p(x, y, T_i x, T_i y) = ||(x - T_1 x) - (y - T_1 y)||^2
/// on sampled pairs. Margins are relative errors.
CertificationReport verify_expectation_identities(const SplittingMap& map,
                                                  const PairRegion& region,
                                                  const CertifyOptions& options = {});

}  // namespace randblock
