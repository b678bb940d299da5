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

#include "randblock/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "randblock/errors.hpp"

namespace randblock {

PairRegion PairRegion::box(int dim, double lo, double hi) {
  return {Vector::Constant(dim, lo), Vector::Constant(dim, hi), {}};
}

void PairRegion::validate() const {
  if (lo.size() != hi.size()) throw DimensionMismatch("region bounds differ in length");
  if (lo.size() == 0) throw InvalidArgument("region is empty");
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(lo[i] <= hi[i])) {
      throw InvalidArgument("region has min > max in coordinate " + std::to_string(i + 1));
    }
  }
  for (int t : tied)
    if (t < 0 || t >= dim()) throw InvalidArgument("tied coordinate outside the region");
}

Vector PairRegion::sample_point(Rng& rng) const {
  Vector x(lo.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(lo[i], hi[i]);
  return x;
}

std::pair<Vector, Vector> PairRegion::sample_pair(Rng& rng) const {
  Vector x = sample_point(rng);
  Vector y = sample_point(rng);
  for (int t : tied) y[t] = x[t];
  return {std::move(x), std::move(y)};
}

std::string CertificationReport::verdict_text() const {
  std::ostringstream os;
  if (pass) {
    os << "no violation found on " << samples << " samples";
  } else {
    os << "counterexample found (margin " << max_margin << ")";
  }
  return os.str();
}

namespace {

using MarginFn = std::function<double(const Vector&, const Vector&)>;

struct PairScore {
  double margin;
  Vector x, y;
};

/// Coordinate search that pushes a pair toward larger margin inside the region.
PairScore refine_pair(const MarginFn& margin, const PairRegion& region, PairScore start,
                      int steps) {
  const int n = region.dim();
  std::vector<char> tied(static_cast<std::size_t>(n), 0);
  for (int t : region.tied) tied[t] = 1;
  Vector h = 0.05 * (region.hi - region.lo);
  PairScore best = std::move(start);
  for (int it = 0; it < steps; ++it) {
    bool improved = false;
    for (int which = 0; which < 2; ++which) {
      for (int c = 0; c < n; ++c) {
        if (h[c] <= 0.0) continue;
        if (which == 1 && tied[c]) continue;
        for (double sign : {1.0, -1.0}) {
          PairScore trial = best;
          Vector& v = which == 0 ? trial.x : trial.y;
          v[c] = std::clamp(v[c] + sign * h[c], region.lo[c], region.hi[c]);
          if (tied[c]) trial.y[c] = trial.x[c];
          trial.margin = margin(trial.x, trial.y);
          if (trial.margin > best.margin) {
            best = std::move(trial);
            improved = true;
          }
        }
      }
    }
    if (!improved) h *= 0.5;
  }
  return best;
}

CertificationReport sample_and_refine(const std::string& property, const MarginFn& margin,
                                      const PairRegion& region, const CertifyOptions& options) {
  region.validate();
  CertificationReport rep;
  rep.property = property;
  rep.tolerance = options.tolerance;
  Rng rng(options.seed, 0, 7);
  std::vector<PairScore> top;
  for (std::size_t s = 0; s < options.n_pairs; ++s) {
    auto [x, y] = region.sample_pair(rng);
    const double m = margin(x, y);
    ++rep.samples;
    ++rep.eligible;
    if (m > rep.max_margin) {
      rep.max_margin = m;
      rep.witness = Witness{x, y};
    }
    if (options.refine) {
      top.push_back({m, std::move(x), std::move(y)});
      if (top.size() > 4 * options.refine_starts) {
        std::partial_sort(top.begin(), top.begin() + static_cast<long>(options.refine_starts),
                          top.end(), [](const auto& a, const auto& b) { return a.margin > b.margin; });
        top.resize(options.refine_starts);
      }
    }
  }
  if (options.refine) {
    std::stable_sort(top.begin(), top.end(),
                     [](const auto& a, const auto& b) { return a.margin > b.margin; });
    if (top.size() > options.refine_starts) top.resize(options.refine_starts);
    for (auto& start : top) {
      PairScore r = refine_pair(margin, region, std::move(start), options.refine_steps);
      if (r.margin > rep.max_margin) {
        rep.max_margin = r.margin;
        rep.witness = Witness{r.x, r.y};
      }
    }
  }
  rep.pass = !(rep.max_margin > options.tolerance);
  return rep;
}

double scale_of(double d2) { return std::max(1.0, d2); }

}  // namespace

double pointwise_aafne_margin(const MapFn& map, const Vector& x, const Vector& y, double alpha,
                              double epsilon) {
  const Vector tx = map(x), ty = map(y);
  const double d2 = (x - y).squaredNorm();
  const double lhs = (tx - ty).squaredNorm();
  const double rhs =
      (1.0 + epsilon) * d2 - (1.0 - alpha) / alpha * transport_discrepancy(x, y, tx, ty);
  return (lhs - rhs) / scale_of(d2);
}

CertificationReport certify_pointwise_aafne(const MapFn& map, const PairRegion& region,
                                            double alpha, double epsilon,
                                            const CertifyOptions& options) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0,1)");
  if (!(epsilon >= 0.0)) throw InvalidArgument("violation must be nonnegative");
  auto rep = sample_and_refine(
      "pointwise_aafne",
      [&](const Vector& x, const Vector& y) {
        return pointwise_aafne_margin(map, x, y, alpha, epsilon);
      },
      region, options);
  rep.alpha = alpha;
  rep.epsilon = epsilon;
  if (rep.witness) {
    const double d = (rep.witness->x - rep.witness->y).norm();
    const double td = (map(rep.witness->x) - map(rep.witness->y)).norm();
    if (d > 0.0) rep.details.emplace_back("witness_expansion_ratio", td / d);
  }
  return rep;
}

double expectation_aafne_margin(const SplittingMap& map, const Vector& x, const Vector& y,
                                double alpha, double epsilon) {
  const auto& lay = map.layout();
  const auto& p = map.block_probs();
  const auto& scheme = map.scheme();
  double lhs = 0.0, psi = 0.0;
  for (std::size_t i = 0; i < scheme.size(); ++i) {
    if (scheme.prob(i) == 0.0) continue;
    const Vector tx = map.apply(i, x), ty = map.apply(i, y);
    lhs += scheme.prob(i) * weighted_norm_squared(lay, p, tx - ty);
    psi += scheme.prob(i) * weighted_transport_discrepancy(lay, x, y, tx, ty, p);
  }
  const double d2 = weighted_norm_squared(lay, p, x - y);
  const double rhs = (1.0 + epsilon) * d2 - (1.0 - alpha) / alpha * psi;
  return (lhs - rhs) / scale_of(d2);
}

CertificationReport certify_aafne_in_expectation(const SplittingMap& map, const PairRegion& region,
                                                 double alpha, double epsilon,
                                                 const CertifyOptions& options) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidArgument("alpha must lie in (0,1)");
  if (!(epsilon >= 0.0)) throw InvalidArgument("violation must be nonnegative");
  if (region.dim() != map.layout().total_dim()) throw DimensionMismatch("region dimension");
  auto rep = sample_and_refine(
      "aafne_in_expectation",
      [&](const Vector& x, const Vector& y) {
        return expectation_aafne_margin(map, x, y, alpha, epsilon);
      },
      region, options);
  rep.alpha = alpha;
  rep.epsilon = epsilon;
  return rep;
}

CertificationReport certify_paracontraction_in_expectation(
    const SplittingMap& map, const std::vector<Vector>& c_points, const PairRegion& region,
    const CertifyOptions& options, double residual_threshold) {
  region.validate();
  if (region.dim() != map.layout().total_dim()) throw DimensionMismatch("region dimension");
  if (c_points.empty()) throw InvalidFixedPoints("paracontraction needs a nonempty set C");
  const auto& lay = map.layout();
  const auto& p = map.block_probs();
  const auto& scheme = map.scheme();
  for (const auto& z : c_points) {
    lay.check(z, "fixed point");
    for (std::size_t i = 0; i < scheme.size(); ++i) {
      if ((z - map.apply(i, z)).norm() > 1e-12) {
        throw InvalidFixedPoints("declared point is moved by T_" + std::to_string(i + 1));
      }
    }
  }

  CertificationReport rep;
  rep.property = "paracontraction_in_expectation";
  rep.tolerance = 0.0;
  Rng rng(options.seed, 0, 11);
  for (std::size_t s = 0; s < options.n_pairs; ++s) {
    const Vector x = region.sample_point(rng);
    ++rep.samples;
    if (!((x - map.apply_full(x)).norm() > residual_threshold)) continue;
    ++rep.eligible;
    std::vector<Vector> images;
    for (std::size_t i = 0; i < scheme.size(); ++i) images.push_back(map.apply(i, x));
    for (const auto& y : c_points) {
      const double base = weighted_norm(lay, p, x - y);
      if (!(base > 0.0)) continue;
      double expected = 0.0;
      for (std::size_t i = 0; i < scheme.size(); ++i)
        expected += scheme.prob(i) * weighted_norm(lay, p, images[i] - y);
      const double m = expected / base - 1.0;
      if (m > rep.max_margin) {
        rep.max_margin = m;
        rep.witness = Witness{x, y};
      }
    }
  }
  // Strict decrease is required; an empty eligible set passes vacuously.
  rep.pass = rep.eligible == 0 || rep.max_margin < 0.0;
  return rep;
}

CertificationReport verify_expectation_identities(const SplittingMap& map,
                                                  const PairRegion& region,
                                                  const CertifyOptions& options) {
  region.validate();
  if (region.dim() != map.layout().total_dim()) throw DimensionMismatch("region dimension");
  const auto& lay = map.layout();
  const auto& p = map.block_probs();
  const auto& scheme = map.scheme();
  CertificationReport rep;
  rep.property = "expectation_identities";
  rep.tolerance = options.tolerance;
  double worst_motion = 0.0, worst_psi = 0.0;
  Rng rng(options.seed, 0, 13);
  for (std::size_t s = 0; s < options.n_pairs; ++s) {
    const auto [x, y] = region.sample_pair(rng);
    ++rep.samples;
    ++rep.eligible;
    double motion = 0.0, psi = 0.0;
    for (std::size_t i = 0; i < scheme.size(); ++i) {
      const Vector tx = map.apply(i, x), ty = map.apply(i, y);
      motion += scheme.prob(i) * weighted_norm_squared(lay, p, tx - ty);
      psi += scheme.prob(i) * weighted_transport_discrepancy(lay, x, y, tx, ty, p);
    }
    const Vector t1x = map.apply_full(x), t1y = map.apply_full(y);
    const double motion_ref =
        (t1x - t1y).squaredNorm() - (x - y).squaredNorm() + weighted_norm_squared(lay, p, x - y);
    const double psi_ref = ((x - t1x) - (y - t1y)).squaredNorm();
    const double e1 = std::abs(motion - motion_ref) / std::max(1.0, std::abs(motion_ref));
    const double e2 = std::abs(psi - psi_ref) / std::max(1.0, std::abs(psi_ref));
    worst_motion = std::max(worst_motion, e1);
    worst_psi = std::max(worst_psi, e2);
    if (std::max(e1, e2) > rep.max_margin) {
      rep.max_margin = std::max(e1, e2);
      rep.witness = Witness{x, y};
    }
  }
  rep.details.emplace_back("max_rel_error_motion", worst_motion);
  rep.details.emplace_back("max_rel_error_psi", worst_psi);
  rep.pass = !(rep.max_margin > options.tolerance);
  return rep;
}

}  // namespace randblock
