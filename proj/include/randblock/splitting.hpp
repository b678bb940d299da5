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
#include <string>

#include "randblock/blockspace.hpp"
#include "randblock/operators.hpp"

namespace randblock {

enum class Flavor { ForwardBackward, DouglasRachford };

std::string to_string(Flavor flavor);
Flavor flavor_from_string(const std::string& name);

/// The family {T_i} of blockwise forward-backward or Douglas-Rachford
/// updates. T_i updates the blocks in M_i and leaves the others unchanged.
class SplittingMap {
 public:
  SplittingMap(Flavor flavor, std::shared_ptr<const SmoothCoupling> coupling, SeparableTerm terms,
               StepSchedule steps, BlockSubsetScheme scheme, InnerSolveOptions inner = {});

  Flavor flavor() const { return flavor_; }
  const SmoothCoupling& coupling() const { return *coupling_; }
  std::shared_ptr<const SmoothCoupling> coupling_ptr() const { return coupling_; }
  const SeparableTerm& terms() const { return terms_; }
  const StepSchedule& steps() const { return steps_; }
  const BlockSubsetScheme& scheme() const { return scheme_; }
  const BlockLayout& layout() const { return coupling_->layout(); }
  const BlockProbabilities& block_probs() const { return scheme_.block_probs(); }

  /// J_{dh_j,t_j}(x_j - t_j grad_j f(x))
  Vector apply_fb_block(int j, const Vector& x) const;
  /// 1/2 (R_{df_j(.;y),t_j} R_{dh_j,t_j}(x_j) + x_j) with y = R_{dg_j,t_j}(x).
  Vector apply_dr_block(int j, const Vector& x) const;
  Vector apply_block(int j, const Vector& x) const;

  /// T_i x for subset index i.
  Vector apply(std::size_t i, const Vector& x) const;
  /// T_1 x, every block updated.
  Vector apply_full(const Vector& x) const;

  /// Same map over a different scheme.
  SplittingMap with_scheme(BlockSubsetScheme scheme) const;

 private:
  Flavor flavor_;
  std::shared_ptr<const SmoothCoupling> coupling_;
  SeparableTerm terms_;
  StepSchedule steps_;
  BlockSubsetScheme scheme_;
  InnerSolveOptions inner_;
};

/// psi(x, x0, x+, x0+) = ||(x - x+) - (x0 - x0+)||^2
double transport_discrepancy(const Vector& x, const Vector& x0, const Vector& xp,
                             const Vector& x0p);

/// ||(x - Tx) - (y - Ty)||_p^2
double weighted_transport_discrepancy(const BlockLayout& layout, const Vector& x,
                                      const Vector& y, const Vector& tx, const Vector& ty,
                                      const BlockProbabilities& p);

/// Constant alpha in (0,1) and violation epsilon >= 0 of an a-alpha-fne map.
struct RegularityConstants {
  double alpha = 0.5;
  double violation = 0.0;
};

/// alpha_DR = 2/3 with eps <= tau_f + tau_h + tau_f tau_h, or
/// alpha_FB = 2 / (1 + 1/max(1/2, alpha_gd)) with eps <= eps_GD + tau_h + eps_GD tau_h.
/// Convex data zero the violation.
RegularityConstants composite_constants(const SplittingMap& map, double alpha_gd = 0.5);

/// (alpha, p_max * eps): the constants of the update function in expectation
/// with respect to the p-weighted norm.
RegularityConstants expectation_constants(const RegularityConstants& constants,
                                          const BlockProbabilities& p);

}  // namespace randblock
