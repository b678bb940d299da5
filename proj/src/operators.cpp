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

#include "randblock/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "randblock/errors.hpp"

namespace randblock {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgument("resolvent parameter must be positive, got " + std::to_string(lambda));
  }
}

bool lex_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

}  // namespace

// ---------------------------------------------------------------- couplings

SmoothCoupling::SmoothCoupling(BlockLayout layout, CouplingConstants constants)
    : layout_(std::move(layout)), constants_(std::move(constants)) {
  const auto m = static_cast<std::size_t>(layout_.num_blocks());
  if (constants_.lipschitz.size() != m || constants_.hypomono.size() != m) {
    throw DimensionMismatch("coupling constants must have one entry per block");
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (!(constants_.lipschitz[j] > 0.0)) throw InvalidArgument("Lipschitz constants must be > 0");
    if (!(constants_.hypomono[j] >= 0.0)) throw InvalidArgument("hypomonotonicity must be >= 0");
  }
}

double SmoothCoupling::max_lipschitz() const {
  return *std::max_element(constants_.lipschitz.begin(), constants_.lipschitz.end());
}

double SmoothCoupling::max_hypomono() const {
  return *std::max_element(constants_.hypomono.begin(), constants_.hypomono.end());
}

Vector SmoothCoupling::partial_gradient(const Vector& x, int j) const {
  return layout_.block(gradient(x), j);
}

std::optional<Vector> SmoothCoupling::closed_form_partial_resolvent(const Vector&, int,
                                                                    double) const {
  return std::nullopt;
}

CouplingConstants QuadraticCoupling::derive_constants(const BlockLayout& layout,
                                                      const Matrix& q) {
  const int m = layout.num_blocks();
  CouplingConstants c;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(q, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  const double opnorm = eig.eigenvalues().cwiseAbs().maxCoeff();

  bool block_diagonal = true;
  for (int a = 0; a < m && block_diagonal; ++a) {
    for (int b = 0; b < m; ++b) {
      if (a == b) continue;
      if (q.block(layout.offset(a), layout.offset(b), layout.block_dim(a), layout.block_dim(b))
              .cwiseAbs()
              .maxCoeff() > 0.0) {
        block_diagonal = false;
        break;
      }
    }
  }
  for (int j = 0; j < m; ++j) {
    double lj = opnorm;
    if (block_diagonal) {
      Eigen::SelfAdjointEigenSolver<Matrix> ej(
          q.block(layout.offset(j), layout.offset(j), layout.block_dim(j), layout.block_dim(j)),
          Eigen::EigenvaluesOnly);
      lj = ej.eigenvalues().cwiseAbs().maxCoeff();
    }
    // A constant partial gradient is Lipschitz with any constant.
    c.lipschitz.push_back(lj > 0.0 ? lj : 1.0);
    c.hypomono.push_back(std::max(0.0, -lmin));
  }
  c.convex = lmin >= -1e-12 * std::max(1.0, opnorm);
  if (c.convex) std::fill(c.hypomono.begin(), c.hypomono.end(), 0.0);
  return c;
}

namespace {
void check_quadratic(const BlockLayout& layout, const Matrix& q, const Vector& b) {
  if (q.rows() != layout.total_dim() || q.cols() != layout.total_dim() ||
      b.size() != layout.total_dim()) {
    throw DimensionMismatch("quadratic coupling data does not match the layout");
  }
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, q.cwiseAbs().maxCoeff())) {
    throw InvalidArgument("quadratic coupling matrix must be symmetric");
  }
}
}  // namespace

QuadraticCoupling::QuadraticCoupling(BlockLayout layout, Matrix q, Vector b)
    : QuadraticCoupling(layout, q, b, derive_constants(layout, q)) {}

QuadraticCoupling::QuadraticCoupling(BlockLayout layout, Matrix q, Vector b,
                                     CouplingConstants declared)
    : SmoothCoupling(layout, std::move(declared)), q_(std::move(q)), b_(std::move(b)) {
  check_quadratic(this->layout(), q_, b_);
}

double QuadraticCoupling::value(const Vector& x) const {
  layout().check(x);
  return 0.5 * x.dot(q_ * x) + b_.dot(x);
}

Vector QuadraticCoupling::gradient(const Vector& x) const {
  layout().check(x);
  return q_ * x + b_;
}

Vector QuadraticCoupling::partial_gradient(const Vector& x, int j) const {
  layout().check(x);
  const int o = layout().offset(j), d = layout().block_dim(j);
  return q_.middleRows(o, d) * x + b_.segment(o, d);
}

std::optional<Vector> QuadraticCoupling::closed_form_partial_resolvent(const Vector& x, int j,
                                                                       double lambda) const {
  const int o = layout().offset(j), d = layout().block_dim(j);
  const Matrix qjj = q_.block(o, o, d, d);
  const Vector xj = x.segment(o, d);
  // Gradient contribution of the frozen blocks.
  const Vector frozen = q_.middleRows(o, d) * x - qjj * xj + b_.segment(o, d);
  const Matrix a = Matrix::Identity(d, d) + lambda * qjj;
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) {
    throw EmptyResolvent("partial resolvent of block " + std::to_string(j + 1) +
                         " is not single-valued at this step");
  }
  return Vector(lu.solve(xj - lambda * frozen));
}

FunctionCoupling::FunctionCoupling(BlockLayout layout, ValueFn value, GradientFn gradient,
                                   CouplingConstants constants, std::string name)
    : SmoothCoupling(std::move(layout), std::move(constants)),
      value_(std::move(value)),
      gradient_(std::move(gradient)),
      name_(std::move(name)) {}

namespace {
CouplingConstants unit_constants(const BlockLayout& layout) {
  const auto m = static_cast<std::size_t>(layout.num_blocks());
  return {std::vector<double>(m, 1.0), std::vector<double>(m, 0.0), true};
}
}  // namespace

DiagonalIndicatorCoupling::DiagonalIndicatorCoupling(BlockLayout layout)
    : SmoothCoupling(layout, unit_constants(layout)) {
  for (int j = 1; j < layout.num_blocks(); ++j) {
    if (layout.block_dim(j) != layout.block_dim(0)) {
      throw DimensionMismatch("diagonal coupling needs blocks of equal dimension");
    }
  }
}

double DiagonalIndicatorCoupling::value(const Vector& x) const {
  const auto& lay = layout();
  lay.check(x);
  const Vector first = lay.block(x, 0);
  for (int j = 1; j < lay.num_blocks(); ++j) {
    if ((lay.block(x, j) - first).norm() > 1e-12 * (1.0 + first.norm())) return kInf;
  }
  return 0.0;
}

Vector DiagonalIndicatorCoupling::gradient(const Vector&) const {
  throw InvalidArgument("the diagonal indicator has no gradient; use the DR flavor");
}

std::optional<Vector> DiagonalIndicatorCoupling::closed_form_partial_resolvent(
    const Vector& x, int j, double) const {
  // {z : x with block j replaced by z lies on D}: the common value of the
  // remaining blocks, which exists only if those agree.
  const auto& lay = layout();
  const int m = lay.num_blocks();
  if (m == 1) return Vector(lay.block(x, 0));
  const int ref = (j == 0) ? 1 : 0;
  const Vector z = lay.block(x, ref);
  for (int k = 0; k < m; ++k) {
    if (k == j || k == ref) continue;
    if ((lay.block(x, k) - z).norm() > 1e-12 * (1.0 + z.norm())) {
      throw EmptyResolvent("diagonal indicator: blocks other than " + std::to_string(j + 1) +
                           " disagree, the partial resolvent is empty");
    }
  }
  return z;
}

std::shared_ptr<QuadraticCoupling> make_squared_diagonal_distance(const BlockLayout& layout) {
  const int m = layout.num_blocks();
  const int n = layout.block_dim(0);
  for (int j = 1; j < m; ++j) {
    if (layout.block_dim(j) != n) {
      throw DimensionMismatch("diagonal coupling needs blocks of equal dimension");
    }
  }
  // Q = (I_m - 11^T/m) (x) I_n, the complement of the averaging projector.
  Matrix avg = Matrix::Constant(m, m, 1.0 / m);
  Matrix core = Matrix::Identity(m, m) - avg;
  Matrix q = Matrix::Zero(m * n, m * n);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) q.block(a * n, b * n, n, n) = core(a, b) * Matrix::Identity(n, n);
  // sum_j ||grad_j f(x) - grad_j f(y)||^2 = ||(I - A) d||^2 <= ||d||^2.
  CouplingConstants c{std::vector<double>(static_cast<std::size_t>(m), 1.0),
                      std::vector<double>(static_cast<std::size_t>(m), 0.0), true};
  return std::make_shared<QuadraticCoupling>(layout, q, Vector::Zero(m * n), c);
}

std::shared_ptr<QuadraticCoupling> make_zero_coupling(const BlockLayout& layout) {
  const int n = layout.total_dim();
  return std::make_shared<QuadraticCoupling>(layout, Matrix::Zero(n, n), Vector::Zero(n),
                                             unit_constants(layout));
}

// -------------------------------------------------------------------- terms

L1Term::L1Term(double weight) : weight_(weight) {
  if (!(weight >= 0.0)) throw InvalidArgument("l1 weight must be nonnegative");
}

double L1Term::value(const Vector& x) const { return weight_ * x.lpNorm<1>(); }

Vector L1Term::resolvent(const Vector& x, double lambda) const {
  const double thr = lambda * weight_;
  return x.unaryExpr([thr](double v) {
    return v > thr ? v - thr : (v < -thr ? v + thr : 0.0);
  });
}

SquaredNormTerm::SquaredNormTerm(double coef) : coef_(coef) {
  if (!(coef >= 0.0)) throw InvalidArgument("squared-norm coefficient must be nonnegative");
}

double SquaredNormTerm::value(const Vector& x) const { return coef_ * x.squaredNorm(); }

Vector SquaredNormTerm::resolvent(const Vector& x, double lambda) const {
  return x / (1.0 + 2.0 * coef_ * lambda);
}

BoxSet::BoxSet(Vector lo, Vector hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size()) throw DimensionMismatch("box bounds differ in length");
  if ((lo_.array() > hi_.array()).any()) throw InvalidArgument("box has lo > hi");
}

Vector BoxSet::project(const Vector& x) const { return x.cwiseMax(lo_).cwiseMin(hi_); }

BallSet::BallSet(Vector center, double radius) : center_(std::move(center)), radius_(radius) {
  if (!(radius >= 0.0)) throw InvalidArgument("ball radius must be nonnegative");
}

Vector BallSet::project(const Vector& x) const {
  const Vector d = x - center_;
  const double n = d.norm();
  if (n <= radius_) return x;
  return center_ + (radius_ / n) * d;
}

LineSet::LineSet(Vector point, Vector direction) : point_(std::move(point)) {
  if (direction.size() != point_.size()) throw DimensionMismatch("line direction length");
  const double n = direction.norm();
  if (!(n > 0.0)) throw InvalidArgument("line direction must be nonzero");
  direction_ = direction / n;
}

Vector LineSet::project(const Vector& x) const {
  return point_ + direction_ * direction_.dot(x - point_);
}

double IndicatorTerm::value(const Vector& x) const {
  return set_->distance(x) <= 1e-12 * (1.0 + x.norm()) ? 0.0 : kInf;
}

FiniteSetIndicator::FiniteSetIndicator(std::vector<Vector> points, double declared_submono)
    : points_(std::move(points)), submono_(declared_submono) {
  if (points_.empty()) throw InvalidArgument("finite set must be nonempty");
}

double FiniteSetIndicator::value(const Vector& x) const {
  for (const auto& p : points_)
    if ((x - p).norm() <= 1e-12 * (1.0 + x.norm())) return 0.0;
  return kInf;
}

Vector FiniteSetIndicator::resolvent(const Vector& x, double) const {
  const Vector* best = &points_.front();
  double best_d = (x - *best).squaredNorm();
  for (std::size_t k = 1; k < points_.size(); ++k) {
    const double d = (x - points_[k]).squaredNorm();
    if (d < best_d || (d == best_d && lex_less(points_[k], *best))) {
      best = &points_[k];
      best_d = d;
    }
  }
  return *best;
}

SeparableTerm::SeparableTerm(BlockLayout layout,
                             std::vector<std::shared_ptr<const BlockTerm>> terms)
    : layout_(std::move(layout)), terms_(std::move(terms)) {
  if (static_cast<int>(terms_.size()) != layout_.num_blocks()) {
    throw DimensionMismatch("need one separable term per block");
  }
  for (const auto& t : terms_)
    if (!t) throw InvalidArgument("null separable term");
}

SeparableTerm SeparableTerm::zero(const BlockLayout& layout) {
  auto z = std::make_shared<ZeroTerm>();
  return SeparableTerm(layout, std::vector<std::shared_ptr<const BlockTerm>>(
                                   static_cast<std::size_t>(layout.num_blocks()), z));
}

double SeparableTerm::value(const Vector& x) const {
  layout_.check(x);
  double s = 0.0;
  for (int j = 0; j < layout_.num_blocks(); ++j) s += terms_[j]->value(layout_.block(x, j));
  return s;
}

double SeparableTerm::max_submonotonicity() const {
  double tau = 0.0;
  for (const auto& t : terms_) tau = std::max(tau, t->submonotonicity());
  return tau;
}

bool SeparableTerm::convex() const {
  return std::all_of(terms_.begin(), terms_.end(), [](const auto& t) { return t->convex(); });
}

StepSchedule::StepSchedule(std::vector<double> steps) : t(std::move(steps)) {
  if (t.empty()) throw InvalidArgument("step schedule is empty");
  for (double s : t)
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("step lengths must be positive");
}

StepSchedule StepSchedule::uniform(int m, double step) {
  return StepSchedule(std::vector<double>(static_cast<std::size_t>(m), step));
}

bool StepSchedule::is_global() const {
  return std::all_of(t.begin(), t.end(), [&](double s) { return s == t.front(); });
}

// ---------------------------------------------------------------- resolvents

Vector resolvent_separable(const SeparableTerm& term, int j, const Vector& xj, double lambda) {
  check_lambda(lambda);
  if (xj.size() != term.layout().block_dim(j)) {
    throw DimensionMismatch("block " + std::to_string(j + 1) + " input has wrong dimension");
  }
  Vector y = term.term(j).resolvent(xj, lambda);
  if (!y.allFinite()) throw EmptyResolvent(term.term(j).name() + " resolvent produced no point");
  return y;
}

Vector resolvent_partial_smooth(const SmoothCoupling& f, int j, const Vector& x, double lambda,
                                const InnerSolveOptions& options) {
  check_lambda(lambda);
  const auto& lay = f.layout();
  lay.check(x);
  if (auto closed = f.closed_form_partial_resolvent(x, j, lambda)) return *closed;
  if (!f.differentiable()) {
    throw EmptyResolvent(f.name() + " has neither a gradient nor a closed-form resolvent");
  }

  const Vector xj = lay.block(x, j);
  Vector point = x;
  auto residual_at = [&](const Vector& y) {
    lay.block(point, j) = y;
    return Vector(y + lambda * f.partial_gradient(point, j) - xj);
  };

  Vector y = xj;
  Vector r = residual_at(y);
  double rn = r.norm();
  double damping = 1.0;
  for (int it = 0; it < options.max_iter && rn > options.tol; ++it) {
    const Vector trial = y - damping * r;
    const Vector rt = residual_at(trial);
    const double rtn = rt.norm();
    if (rtn < rn) {
      y = trial;
      r = rt;
      rn = rtn;
      damping = std::min(1.0, 2.0 * damping);
    } else {
      damping *= 0.5;
      if (damping < 1e-8) break;
    }
  }
  if (!(rn <= options.tol)) {
    throw InnerSolveDiverged("partial resolvent of block " + std::to_string(j + 1) +
                             " stalled at residual " + std::to_string(rn));
  }
  return y;
}

Vector reflector(const Vector& resolvent_output, const Vector& input) {
  if (resolvent_output.size() != input.size()) throw DimensionMismatch("reflector inputs");
  return 2.0 * resolvent_output - input;
}

Vector gradient_descent_map(const SmoothCoupling& f, const StepSchedule& steps, const Vector& x) {
  const auto& lay = f.layout();
  lay.check(x);
  if (static_cast<int>(steps.t.size()) != lay.num_blocks()) {
    throw DimensionMismatch("step schedule does not match the layout");
  }
  const Vector g = f.gradient(x);
  Vector out = x;
  for (int j = 0; j < lay.num_blocks(); ++j) lay.block(out, j) -= steps.t[j] * lay.block(g, j);
  return out;
}

StepBound gd_step_bound(const SmoothCoupling& f, double alpha_bar) {
  if (!(alpha_bar > 0.0 && alpha_bar <= 1.0)) throw InvalidArgument("alpha must lie in (0,1]");
  StepBound out;
  for (int j = 0; j < f.layout().num_blocks(); ++j) {
    const double l = f.lipschitz()[j], tau = f.hypomono()[j];
    out.upper.push_back((alpha_bar * std::sqrt(tau * tau + l * l) - alpha_bar * tau) / (l * l));
  }
  if (f.convex()) out.global_upper = 2.0 * alpha_bar / f.max_lipschitz();
  return out;
}

double gd_violation_bound(const SmoothCoupling& f, const StepSchedule& steps, double alpha_bar,
                          bool apply_convex_clause) {
  if (!(alpha_bar > 0.0 && alpha_bar <= 1.0)) throw InvalidArgument("alpha must lie in (0,1]");
  const int m = f.layout().num_blocks();
  if (static_cast<int>(steps.t.size()) != m) throw DimensionMismatch("step schedule length");
  if (apply_convex_clause && f.convex() && steps.is_global() &&
      steps.t.front() <= 2.0 * alpha_bar / f.max_lipschitz()) {
    return 0.0;
  }
  double eps = 0.0;
  for (int j = 0; j < m; ++j) {
    const double t = steps.t[j], l = f.lipschitz()[j];
    eps = std::max(eps, 2.0 * t * f.hypomono()[j] + t * t * l * l / alpha_bar);
  }
  return eps;
}

double estimate_submonotonicity(const std::function<Vector(const Vector&)>& subgradient,
                                const std::vector<std::pair<Vector, Vector>>& samples,
                                double lambda) {
  check_lambda(lambda);
  double tau = 0.0;
  for (const auto& [u, v] : samples) {
    const Vector z = lambda * subgradient(u);
    const Vector w = lambda * subgradient(v);
    const double inner = (z - w).dot(u - v);
    if (inner >= 0.0) continue;
    const double spread = ((u + z) - (v + w)).squaredNorm();
    if (spread == 0.0) return kInf;
    tau = std::max(tau, -2.0 * inner / spread);
  }
  return tau;
}

}  // namespace randblock
