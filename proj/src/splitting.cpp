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

#include "randblock/splitting.hpp"

#include <algorithm>
#include <string>

#include "randblock/errors.hpp"

namespace randblock {

std::string to_string(Flavor flavor) {
  return flavor == Flavor::ForwardBackward ? "FB" : "DR";
}

Flavor flavor_from_string(const std::string& name) {
  if (name == "FB" || name == "fb") return Flavor::ForwardBackward;
  if (name == "DR" || name == "dr") return Flavor::DouglasRachford;
  throw InvalidArgument("unknown splitting flavor '" + name + "' (expected FB or DR)");
}

SplittingMap::SplittingMap(Flavor flavor, std::shared_ptr<const SmoothCoupling> coupling,
                           SeparableTerm terms, StepSchedule steps, BlockSubsetScheme scheme,
                           InnerSolveOptions inner)
    : flavor_(flavor),
      coupling_(std::move(coupling)),
      terms_(std::move(terms)),
      steps_(std::move(steps)),
      scheme_(std::move(scheme)),
      inner_(inner) {
  if (!coupling_) throw InvalidArgument("splitting map needs a coupling");
  const int m = coupling_->layout().num_blocks();
  if (!(terms_.layout() == coupling_->layout())) {
    throw DimensionMismatch("coupling and separable terms use different layouts");
  }
  if (static_cast<int>(steps_.t.size()) != m) throw DimensionMismatch("one step per block");
  if (scheme_.num_blocks() != m) throw DimensionMismatch("scheme and layout disagree on m");
  if (flavor_ == Flavor::ForwardBackward && !coupling_->differentiable()) {
    throw InvalidArgument(coupling_->name() + " is not differentiable; use the DR flavor");
  }
}

Vector SplittingMap::apply_fb_block(int j, const Vector& x) const {
  const auto& lay = layout();
  const double t = steps_.t[j];
  const Vector forward = lay.block(x, j) - t * coupling_->partial_gradient(x, j);
  return resolvent_separable(terms_, j, forward, t);
}

Vector SplittingMap::apply_dr_block(int j, const Vector& x) const {
  const auto& lay = layout();
  const double t = steps_.t[j];
  const Vector xj = lay.block(x, j);
  const Vector rh = reflector(resolvent_separable(terms_, j, xj, t), xj);
  // y = R_{dg_j,t_j}(x): only block j is reflected.
  Vector y = x;
  lay.block(y, j) = rh;
  const Vector rf = reflector(resolvent_partial_smooth(*coupling_, j, y, t, inner_), rh);
  return 0.5 * (rf + xj);
}

Vector SplittingMap::apply_block(int j, const Vector& x) const {
  return flavor_ == Flavor::ForwardBackward ? apply_fb_block(j, x) : apply_dr_block(j, x);
}

Vector SplittingMap::apply(std::size_t i, const Vector& x) const {
  layout().check(x);
  Vector out = x;
  for (int j : scheme_.subset(i)) layout().block(out, j) = apply_block(j, x);
  return out;
}

Vector SplittingMap::apply_full(const Vector& x) const {
  layout().check(x);
  Vector out = x;
  for (int j = 0; j < layout().num_blocks(); ++j) layout().block(out, j) = apply_block(j, x);
  return out;
}

SplittingMap SplittingMap::with_scheme(BlockSubsetScheme scheme) const {
  return SplittingMap(flavor_, coupling_, terms_, steps_, std::move(scheme), inner_);
}

double transport_discrepancy(const Vector& x, const Vector& x0, const Vector& xp,
                             const Vector& x0p) {
  if (x.size() != x0.size() || x.size() != xp.size() || x.size() != x0p.size()) {
    throw DimensionMismatch("transport discrepancy arguments differ in length");
  }
  return ((x - xp) - (x0 - x0p)).squaredNorm();
}

double weighted_transport_discrepancy(const BlockLayout& layout, const Vector& x,
                                      const Vector& y, const Vector& tx, const Vector& ty,
                                      const BlockProbabilities& p) {
  layout.check(x);
  layout.check(y);
  layout.check(tx);
  layout.check(ty);
  return weighted_norm_squared(layout, p, (x - tx) - (y - ty));
}

RegularityConstants composite_constants(const SplittingMap& map, double alpha_gd) {
  const auto& f = map.coupling();
  const double tau_h = map.terms().max_submonotonicity();
  const bool h_convex = map.terms().convex();
  RegularityConstants out;
  if (map.flavor() == Flavor::DouglasRachford) {
    out.alpha = 2.0 / 3.0;
    const double tau_f = f.max_hypomono();
    out.violation = (f.convex() && h_convex) ? 0.0 : tau_f + tau_h + tau_f * tau_h;
    return out;
  }
  out.alpha = 2.0 / (1.0 + 1.0 / std::max(0.5, alpha_gd));
  const double eps_gd = gd_violation_bound(f, map.steps(), alpha_gd);
  out.violation = h_convex ? eps_gd : eps_gd + tau_h + eps_gd * tau_h;
  return out;
}

RegularityConstants expectation_constants(const RegularityConstants& constants,
                                          const BlockProbabilities& p) {
  return {constants.alpha, p.p_max * constants.violation};
}

}  // namespace randblock
