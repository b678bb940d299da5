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

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "randblock/blockspace.hpp"

namespace randblock {

/// Declared regularity of the smooth coupling: blockwise Lipschitz constants
/// L_j of the gradient and hypomonotonicity constants tau_{f_j}.
struct CouplingConstants {
  std::vector<double> lipschitz;
  std::vector<double> hypomono;
  bool convex = true;
};

/// The coupling term f of  f(x) + sum_j h_j(x_j).
class SmoothCoupling {
 public:
  SmoothCoupling(BlockLayout layout, CouplingConstants constants);
  virtual ~SmoothCoupling() = default;

  const BlockLayout& layout() const { return layout_; }
  const std::vector<double>& lipschitz() const { return constants_.lipschitz; }
  const std::vector<double>& hypomono() const { return constants_.hypomono; }
  bool convex() const { return constants_.convex; }
  double max_lipschitz() const;
  double max_hypomono() const;

  virtual std::string name() const = 0;
  virtual double value(const Vector& x) const = 0;
  /// False for couplings such as the diagonal indicator, which only offer
  /// resolvents.
  virtual bool differentiable() const { return true; }
  virtual Vector gradient(const Vector& x) const = 0;
  virtual Vector partial_gradient(const Vector& x, int j) const;

  /// Closed-form J_{df_j(.;x), lambda}(x_j) when one is known.
  virtual std::optional<Vector> closed_form_partial_resolvent(const Vector& x, int j,
                                                              double lambda) const;

 private:
  BlockLayout layout_;
  CouplingConstants constants_;
};

/// f(x) = 1/2 x^T Q x + b^T x.
class QuadraticCoupling final : public SmoothCoupling {
 public:
  /// Derives the constants from Q: L_j = ||Q_jj|| when Q is block diagonal,
  /// otherwise ||Q|| for every block; tau_j = max(0, -lambda_min(Q)).
  QuadraticCoupling(BlockLayout layout, Matrix q, Vector b);
  QuadraticCoupling(BlockLayout layout, Matrix q, Vector b, CouplingConstants declared);

  std::string name() const override { return "quadratic"; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector partial_gradient(const Vector& x, int j) const override;
  std::optional<Vector> closed_form_partial_resolvent(const Vector& x, int j,
                                                      double lambda) const override;

  const Matrix& q() const { return q_; }
  const Vector& b() const { return b_; }

  static CouplingConstants derive_constants(const BlockLayout& layout, const Matrix& q);

 private:
  Matrix q_;
  Vector b_;
};

/// Generic differentiable coupling given by callables. Partial resolvents are
/// computed by the inner fixed-point solver.
class FunctionCoupling final : public SmoothCoupling {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;

  FunctionCoupling(BlockLayout layout, ValueFn value, GradientFn gradient,
                   CouplingConstants constants, std::string name = "function");

  std::string name() const override { return name_; }
  double value(const Vector& x) const override { return value_(x); }
  Vector gradient(const Vector& x) const override { return gradient_(x); }

 private:
  ValueFn value_;
  GradientFn gradient_;
  std::string name_;
};

/// f = iota_D with D the diagonal {x_1 = ... = x_m}. Only usable with DR.
class DiagonalIndicatorCoupling final : public SmoothCoupling {
 public:
  explicit DiagonalIndicatorCoupling(BlockLayout layout);

  std::string name() const override { return "diagonal_indicator"; }
  double value(const Vector& x) const override;
  bool differentiable() const override { return false; }
  Vector gradient(const Vector& x) const override;
  std::optional<Vector> closed_form_partial_resolvent(const Vector& x, int j,
                                                      double lambda) const override;
};

/// f(x) = 1/2 d(x, D)^2, gradient x - P_D x.
std::shared_ptr<QuadraticCoupling> make_squared_diagonal_distance(const BlockLayout& layout);
std::shared_ptr<QuadraticCoupling> make_zero_coupling(const BlockLayout& layout);

/// One separable term h_j acting on a single block.
class BlockTerm {
 public:
  virtual ~BlockTerm() = default;
  virtual std::string name() const = 0;
  /// +infinity outside the domain.
  virtual double value(const Vector& x) const = 0;
  /// A point of J_{dh, lambda}(x); deterministic selection when multi-valued.
  virtual Vector resolvent(const Vector& x, double lambda) const = 0;
  /// tau_{h_j} of the submonotonicity inequality; 0 for convex terms.
  virtual double submonotonicity() const { return 0.0; }
  virtual bool convex() const { return true; }
};

class ZeroTerm final : public BlockTerm {
 public:
  std::string name() const override { return "zero"; }
  double value(const Vector&) const override { return 0.0; }
  Vector resolvent(const Vector& x, double) const override { return x; }
};

/// w * ||x||_1
class L1Term final : public BlockTerm {
 public:
  explicit L1Term(double weight);
  std::string name() const override { return "l1"; }
  double value(const Vector& x) const override;
  Vector resolvent(const Vector& x, double lambda) const override;
  double weight() const { return weight_; }

 private:
  double weight_;
};

/// c * ||x||^2
class SquaredNormTerm final : public BlockTerm {
 public:
  explicit SquaredNormTerm(double coef);
  std::string name() const override { return "squared_norm"; }
  double value(const Vector& x) const override;
  Vector resolvent(const Vector& x, double lambda) const override;

 private:
  double coef_;
};

/// Convex set whose indicator is used as h_j; the resolvent is the projector.
class ConvexSet {
 public:
  virtual ~ConvexSet() = default;
  virtual std::string kind() const = 0;
  virtual int dim() const = 0;
  virtual Vector project(const Vector& x) const = 0;
  double distance(const Vector& x) const { return (x - project(x)).norm(); }
};

class PointSet final : public ConvexSet {
 public:
  explicit PointSet(Vector point) : point_(std::move(point)) {}
  std::string kind() const override { return "point"; }
  int dim() const override { return static_cast<int>(point_.size()); }
  Vector project(const Vector&) const override { return point_; }
  const Vector& point() const { return point_; }

 private:
  Vector point_;
};

class BoxSet final : public ConvexSet {
 public:
  BoxSet(Vector lo, Vector hi);
  std::string kind() const override { return "box"; }
  int dim() const override { return static_cast<int>(lo_.size()); }
  Vector project(const Vector& x) const override;
  const Vector& lo() const { return lo_; }
  const Vector& hi() const { return hi_; }

 private:
  Vector lo_, hi_;
};

class BallSet final : public ConvexSet {
 public:
  BallSet(Vector center, double radius);
  std::string kind() const override { return "ball"; }
  int dim() const override { return static_cast<int>(center_.size()); }
  Vector project(const Vector& x) const override;
  const Vector& center() const { return center_; }
  double radius() const { return radius_; }

 private:
  Vector center_;
  double radius_;
};

/// {point + s * direction : s real}
class LineSet final : public ConvexSet {
 public:
  LineSet(Vector point, Vector direction);
  std::string kind() const override { return "line"; }
  int dim() const override { return static_cast<int>(point_.size()); }
  Vector project(const Vector& x) const override;
  const Vector& point() const { return point_; }
  const Vector& direction() const { return direction_; }

 private:
  Vector point_;
  Vector direction_;  // unit length
};

class IndicatorTerm final : public BlockTerm {
 public:
  explicit IndicatorTerm(std::shared_ptr<const ConvexSet> set) : set_(std::move(set)) {}
  std::string name() const override { return "indicator_" + set_->kind(); }
  double value(const Vector& x) const override;
  Vector resolvent(const Vector& x, double) const override { return set_->project(x); }
  const ConvexSet& set() const { return *set_; }

 private:
  std::shared_ptr<const ConvexSet> set_;
};

/// Indicator of a finite point set. Nonconvex; the projector picks the
/// nearest point, ties broken by the lexicographically smallest point.
class FiniteSetIndicator final : public BlockTerm {
 public:
  explicit FiniteSetIndicator(std::vector<Vector> points,
                              double declared_submono = std::numeric_limits<double>::infinity());
  std::string name() const override { return "indicator_finite"; }
  double value(const Vector& x) const override;
  Vector resolvent(const Vector& x, double) const override;
  double submonotonicity() const override { return submono_; }
  bool convex() const override { return false; }

 private:
  std::vector<Vector> points_;
  double submono_;
};

/// The separable part sum_j h_j(x_j).
class SeparableTerm {
 public:
  SeparableTerm() = default;
  SeparableTerm(BlockLayout layout, std::vector<std::shared_ptr<const BlockTerm>> terms);

  /// h_j = 0 for every block.
  static SeparableTerm zero(const BlockLayout& layout);

  const BlockLayout& layout() const { return layout_; }
  const BlockTerm& term(int j) const { return *terms_.at(static_cast<std::size_t>(j)); }
  double value(const Vector& x) const;
  /// tau_h = max_j tau_{h_j}
  double max_submonotonicity() const;
  bool convex() const;

 private:
  BlockLayout layout_;
  std::vector<std::shared_ptr<const BlockTerm>> terms_;
};

/// Per-block step lengths t_j > 0.
struct StepSchedule {
  std::vector<double> t;

  StepSchedule() = default;
  explicit StepSchedule(std::vector<double> steps);
  static StepSchedule uniform(int m, double t);

  /// True when every block uses the same step.
  bool is_global() const;
};

/// J_{dh_j, lambda}(x_j). Throws EmptyResolvent if the oracle cannot produce a point.
Vector resolvent_separable(const SeparableTerm& term, int j, const Vector& xj, double lambda);

struct InnerSolveOptions {
  double tol = 1e-10;
  int max_iter = 200;
};

/// y with y + lambda * grad_j f(x + (y - x_j) (+) 0) = x_j.
Vector resolvent_partial_smooth(const SmoothCoupling& f, int j, const Vector& x, double lambda,
                                const InnerSolveOptions& options = {});

/// 2y - x
Vector reflector(const Vector& resolvent_output, const Vector& input);

/// x - (+)_j t_j grad_j f(x)
Vector gradient_descent_map(const SmoothCoupling& f, const StepSchedule& steps, const Vector& x);

/// Admissible step intervals (0, upper_j) for the gradient-descent map to be
/// a-alpha-fne with violation below one; for convex f additionally the
/// global bound 2 alpha / L_max.
struct StepBound {
  std::vector<double> upper;
  std::optional<double> global_upper;
};

StepBound gd_step_bound(const SmoothCoupling& f, double alpha_bar);

/// epsilon_GD = max_j { 2 t_j tau_j + t_j^2 L_j^2 / alpha }. For convex f with
/// a global step t <= 2 alpha / L_max the violation is zero.
double gd_violation_bound(const SmoothCoupling& f, const StepSchedule& steps, double alpha_bar,
                          bool apply_convex_clause = true);

/// Smallest tau >= 0 with
///   -tau/2 ||(u + z) - (v + w)||^2 <= <z - w, u - v>,  z = lambda g(u), w = lambda g(v)
/// over the sampled pairs. Returns +inf when u + z = v + w but <z - w, u - v> < 0.
double estimate_submonotonicity(const std::function<Vector(const Vector&)>& subgradient,
                                const std::vector<std::pair<Vector, Vector>>& samples,
                                double lambda);

}  // namespace randblock
