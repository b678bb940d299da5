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

#include "randblock/problems.hpp"

#include <algorithm>
#include <cmath>

#include "randblock/errors.hpp"

namespace randblock {

SplittingMap ProblemSpec::make_map(Flavor flavor, StepSchedule steps, BlockSubsetScheme scheme,
                                   InnerSolveOptions inner) const {
  return SplittingMap(flavor, coupling, terms, std::move(steps), std::move(scheme), inner);
}

SplittingMap ProblemSpec::make_map(Flavor flavor, double step, BlockSubsetScheme scheme) const {
  return make_map(flavor, StepSchedule::uniform(layout.num_blocks(), step), std::move(scheme));
}

ProblemSpec counterexample2d(double t) {
  if (!(t > 0.0)) throw InvalidArgument("step must be positive");
  ProblemSpec p;
  p.id = "counterexample2d";
  p.layout = BlockLayout::uniform(2, 1);
  Matrix q(2, 2);
  q << 2.0, 2.0, 2.0, 2.0;
  CouplingConstants c;
  c.lipschitz = {4.0, 4.0};
  c.hypomono = {0.0, 0.0};
  c.convex = true;
  p.coupling = std::make_shared<QuadraticCoupling>(p.layout, q, Vector::Zero(2), c);
  p.terms = SeparableTerm(p.layout, {std::make_shared<ZeroTerm>(),
                                     std::make_shared<SquaredNormTerm>(1.0)});
  p.default_step = t;
  p.fb_fixed_points = {Vector::Zero(2)};
  p.dr_fixed_points = {Vector::Zero(2)};
  p.critical_points = {Vector::Zero(2)};
  p.region = PairRegion::box(2, -10.0, 10.0);
  p.description = "f(x1,x2) = (x1+x2)^2, h1 = 0, h2 = x2^2";
  return p;
}

Vector counterexample_line_minimizer(double z) {
  Vector v(2);
  v << -z, z;
  return v;
}

SetDescriptor SetDescriptor::point(Vector p) { return {"point", std::move(p), {}, 0.0}; }
SetDescriptor SetDescriptor::box(Vector lo, Vector hi) {
  return {"box", std::move(lo), std::move(hi), 0.0};
}
SetDescriptor SetDescriptor::ball(Vector center, double radius) {
  return {"ball", std::move(center), {}, radius};
}
SetDescriptor SetDescriptor::line(Vector point, Vector direction) {
  return {"line", std::move(point), std::move(direction), 0.0};
}

std::shared_ptr<const ConvexSet> SetDescriptor::make() const {
  if (kind == "point") return std::make_shared<PointSet>(a);
  if (kind == "box") {
    if (b.size() != a.size()) throw DimensionMismatch("box corners differ in dimension");
    return std::make_shared<BoxSet>(a, b);
  }
  if (kind == "ball") return std::make_shared<BallSet>(a, radius);
  if (kind == "line") {
    if (b.size() != a.size()) throw DimensionMismatch("line point and direction differ");
    return std::make_shared<LineSet>(a, b);
  }
  throw UnsupportedSet("unsupported set kind '" + kind + "'");
}

std::string to_string(FeasibilityCoupling kind) {
  return kind == FeasibilityCoupling::SquaredDistance ? "squared_distance" : "indicator";
}

FeasibilityCoupling feasibility_coupling_from_string(const std::string& name) {
  if (name == "squared_distance") return FeasibilityCoupling::SquaredDistance;
  if (name == "indicator" || name == "diagonal_indicator") {
    return FeasibilityCoupling::DiagonalIndicator;
  }
  throw InvalidArgument("unknown feasibility coupling '" + name + "'");
}

namespace {

constexpr double kMemberTol = 1e-12;

int rank_of(const std::string& kind) {
  if (kind == "point") return 0;
  if (kind == "line") return 1;
  if (kind == "box") return 2;
  if (kind == "ball") return 3;
  throw UnsupportedSet("unsupported set kind '" + kind + "'");
}

std::optional<Vector> member(const ConvexSet& s, const Vector& x) {
  if (s.distance(x) <= kMemberTol) return x;
  return std::nullopt;
}

std::optional<Vector> line_box(const LineSet& l, const BoxSet& b) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  const Vector& p = l.point();
  const Vector& d = l.direction();
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (std::abs(d[i]) < 1e-15) {
      if (p[i] < b.lo()[i] - kMemberTol || p[i] > b.hi()[i] + kMemberTol) return std::nullopt;
      continue;
    }
    double s1 = (b.lo()[i] - p[i]) / d[i];
    double s2 = (b.hi()[i] - p[i]) / d[i];
    if (s1 > s2) std::swap(s1, s2);
    lo = std::max(lo, s1);
    hi = std::min(hi, s2);
  }
  if (lo > hi + kMemberTol) return std::nullopt;
  double s = 0.0;
  if (std::isfinite(lo) && std::isfinite(hi)) s = 0.5 * (lo + hi);
  else if (std::isfinite(lo)) s = lo;
  else if (std::isfinite(hi)) s = hi;
  return Vector(p + s * d);
}

}  // namespace

std::optional<Vector> intersection_point(const SetDescriptor& d1, const SetDescriptor& d2) {
  if (d1.dim() != d2.dim()) throw DimensionMismatch("sets live in different dimensions");
  if (rank_of(d1.kind) > rank_of(d2.kind)) return intersection_point(d2, d1);
  const auto s1 = d1.make();
  const auto s2 = d2.make();
  if (d1.kind == "point") return member(*s2, d1.a);
  if (d1.kind == "line") {
    const auto& l = static_cast<const LineSet&>(*s1);
    if (d2.kind == "line") {
      const auto& l2 = static_cast<const LineSet&>(*s2);
      Matrix a(l.dim(), 2);
      a.col(0) = l.direction();
      a.col(1) = -l2.direction();
      const Vector rhs = l2.point() - l.point();
      const Eigen::Vector2d st = a.completeOrthogonalDecomposition().solve(rhs);
      const Vector x = l.point() + st[0] * l.direction();
      return member(*s2, x);
    }
    if (d2.kind == "box") return line_box(l, static_cast<const BoxSet&>(*s2));
    const auto& ball = static_cast<const BallSet&>(*s2);
    return member(ball, l.project(ball.center()));
  }
  if (d1.kind == "box") {
    const auto& b1 = static_cast<const BoxSet&>(*s1);
    if (d2.kind == "box") {
      const auto& b2 = static_cast<const BoxSet&>(*s2);
      const Vector lo = b1.lo().cwiseMax(b2.lo());
      const Vector hi = b1.hi().cwiseMin(b2.hi());
      if ((lo.array() > hi.array()).any()) return std::nullopt;
      return Vector(0.5 * (lo + hi));
    }
    const auto& ball = static_cast<const BallSet&>(*s2);
    return member(ball, b1.project(ball.center()));
  }
  const auto& c1 = static_cast<const BallSet&>(*s1);
  const auto& c2 = static_cast<const BallSet&>(*s2);
  const double dist = (c2.center() - c1.center()).norm();
  if (dist > c1.radius() + c2.radius() + kMemberTol) return std::nullopt;
  if (dist == 0.0) return c1.center();
  const double w = c1.radius() + c2.radius() > 0.0 ? c1.radius() / (c1.radius() + c2.radius()) : 0.0;
  return Vector(c1.center() + w * (c2.center() - c1.center()));
}

ProblemSpec feasibility(const SetDescriptor& d1, const SetDescriptor& d2,
                        FeasibilityCoupling coupling) {
  const int n = d1.dim();
  if (n != d2.dim()) throw DimensionMismatch("sets live in different dimensions");
  const auto s1 = d1.make();
  const auto s2 = d2.make();
  ProblemSpec p;
  p.id = "feasibility";
  p.layout = BlockLayout::uniform(2, n);
  if (coupling == FeasibilityCoupling::SquaredDistance) {
    p.coupling = make_squared_diagonal_distance(p.layout);
  } else {
    p.coupling = std::make_shared<DiagonalIndicatorCoupling>(p.layout);
  }
  p.terms = SeparableTerm(p.layout, {std::make_shared<IndicatorTerm>(s1),
                                     std::make_shared<IndicatorTerm>(s2)});
  p.default_step = 1.0;
  p.convex = true;

  const auto common = intersection_point(d1, d2);
  p.consistent = common.has_value();
  if (common) {
    Vector x(2 * n);
    x << *common, *common;
    p.fb_fixed_points = {x};
    p.dr_fixed_points = {x};
    p.critical_points = {x};
  } else {
    // Alternating projections converge to a best approximation pair.
    Vector a = s1->project(Vector::Zero(n));
    Vector b = s2->project(a);
    for (int it = 0; it < 100000; ++it) {
      const Vector a2 = s1->project(b);
      const Vector b2 = s2->project(a2);
      const double move = (a2 - a).norm() + (b2 - b).norm();
      a = a2;
      b = b2;
      if (move <= 1e-15) break;
    }
    p.best_approximation_pair = std::make_pair(a, b);
    Vector x(2 * n);
    x << a, b;
    if (coupling == FeasibilityCoupling::SquaredDistance) p.fb_fixed_points = {x};
    p.critical_points = {x};
  }
  p.description = "two-set feasibility: " + d1.kind + " and " + d2.kind + ", coupling " +
                  to_string(coupling);

  Vector lo = Vector::Constant(2 * n, -5.0), hi = Vector::Constant(2 * n, 5.0);
  for (const auto& x : p.critical_points) {
    lo = lo.cwiseMin(x - Vector::Constant(2 * n, 5.0));
    hi = hi.cwiseMax(x + Vector::Constant(2 * n, 5.0));
  }
  p.region = {lo, hi, {}};
  return p;
}

ProblemSpec quadratic_l1(const Matrix& q, const Vector& b, const std::vector<double>& lambda,
                         const BlockLayout& layout) {
  const int n = layout.total_dim();
  if (q.rows() != n || q.cols() != n || b.size() != n) {
    throw DimensionMismatch("Q and b must match the layout dimension");
  }
  if (static_cast<int>(lambda.size()) != layout.num_blocks()) {
    throw DimensionMismatch("one l1 weight per block is required");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (q + q.transpose()));
  const double lmin = eig.eigenvalues().minCoeff();
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (lmin < -1e-12 * scale) throw NotPSD("Q has negative eigenvalue " + std::to_string(lmin));

  ProblemSpec p;
  p.id = "quadratic_l1";
  p.layout = layout;
  p.coupling = std::make_shared<QuadraticCoupling>(layout, q, b);
  std::vector<std::shared_ptr<const BlockTerm>> terms;
  for (double w : lambda) terms.push_back(std::make_shared<L1Term>(w));
  p.terms = SeparableTerm(layout, terms);
  p.convex = true;
  p.consistent = true;

  const double lbar = p.coupling->max_lipschitz();
  p.default_step = 1.0 / lbar;
  const SplittingMap fb = p.make_map(Flavor::ForwardBackward, p.default_step,
                                     BlockSubsetScheme::full(layout.num_blocks()));
  Vector x = Vector::Zero(n);
  for (int it = 0; it < 100000; ++it) {
    const Vector nx = fb.apply_full(x);
    const double move = (nx - x).norm();
    x = nx;
    if (move <= 1e-15) break;
  }
  p.critical_points = {x};
  p.fb_fixed_points = {x};
  p.region = PairRegion::box(n, -5.0, 5.0);
  p.description = "1/2 x^T Q x + b^T x + sum_j lambda_j ||x_j||_1";
  return p;
}

}  // namespace randblock
