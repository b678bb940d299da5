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

#include <cmath>
#include <limits>

#include "doctest.h"
#include "randblock/errors.hpp"
#include "randblock/operators.hpp"
#include "support.hpp"

using namespace randblock;
using testing::vec;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

Matrix counterexample_q() {
  Matrix q(2, 2);
  q << 2, 2, 2, 2;
  return q;
}

SeparableTerm single(const BlockLayout& lay, std::shared_ptr<const BlockTerm> t) {
  std::vector<std::shared_ptr<const BlockTerm>> v(static_cast<std::size_t>(lay.num_blocks()), t);
  return SeparableTerm(lay, v);
}

}  // namespace

TEST_CASE("separable resolvents") {
  const auto lay = BlockLayout::uniform(1, 1);
  CHECK(resolvent_separable(SeparableTerm::zero(lay), 0, vec({3.5}), 2.0)[0] == 3.5);

  const auto l1 = single(lay, std::make_shared<L1Term>(1.0));
  CHECK(resolvent_separable(l1, 0, vec({2.0}), 1.0)[0] == doctest::Approx(1.0));
  CHECK(resolvent_separable(l1, 0, vec({0.5}), 1.0)[0] == 0.0);
  CHECK(resolvent_separable(l1, 0, vec({-3.0}), 0.5)[0] == doctest::Approx(-2.5));

  auto half_line = std::make_shared<BoxSet>(vec({0.0}), vec({kInf}));
  const auto ind = single(lay, std::make_shared<IndicatorTerm>(half_line));
  CHECK(resolvent_separable(ind, 0, vec({-3.0}), 1.0)[0] == 0.0);
  CHECK(resolvent_separable(ind, 0, vec({4.0}), 1.0)[0] == 4.0);

  const auto sq = single(lay, std::make_shared<SquaredNormTerm>(1.0));
  CHECK(resolvent_separable(sq, 0, vec({3.0}), 0.25)[0] == doctest::Approx(2.0));

  CHECK_THROWS_AS(resolvent_separable(l1, 0, vec({1.0}), 0.0), InvalidArgument);
}

TEST_CASE("convex resolvents satisfy their inclusion and are firmly nonexpansive") {
  Rng rng(21, 0, 0);
  const std::vector<std::shared_ptr<const BlockTerm>> terms = {
      std::make_shared<L1Term>(0.7),
      std::make_shared<SquaredNormTerm>(1.3),
      std::make_shared<IndicatorTerm>(std::make_shared<BoxSet>(vec({-1, 0}), vec({1, 2}))),
      std::make_shared<IndicatorTerm>(std::make_shared<BallSet>(vec({0.5, -0.5}), 1.5)),
      std::make_shared<IndicatorTerm>(std::make_shared<LineSet>(vec({1, 1}), vec({1, 2}))),
      std::make_shared<IndicatorTerm>(std::make_shared<PointSet>(vec({3, -1}))),
  };
  for (const auto& t : terms) {
    for (int trial = 0; trial < 200; ++trial) {
      const Vector x = testing::random_vector(rng, 2, -4, 4);
      const Vector y = testing::random_vector(rng, 2, -4, 4);
      const double lambda = rng.uniform(0.1, 3.0);
      const Vector jx = t->resolvent(x, lambda), jy = t->resolvent(y, lambda);
      CHECK((jx - jy).squaredNorm() <= (jx - jy).dot(x - y) + 1e-10);
      if (t->name() == "l1") {
        // (x - jx) / lambda must be a subgradient of 0.7 |.|_1 at jx.
        const Vector g = (x - jx) / lambda;
        for (int i = 0; i < 2; ++i) {
          if (jx[i] != 0.0) CHECK(g[i] == doctest::Approx(0.7 * (jx[i] > 0 ? 1 : -1)));
          else CHECK(std::abs(g[i]) <= 0.7 + 1e-12);
        }
      }
      if (t->name() == "squared_norm") CHECK((jx + lambda * 2.6 * jx - x).norm() < 1e-12);
    }
  }
}

TEST_CASE("finite set projection breaks ties lexicographically") {
  FiniteSetIndicator s({vec({1, 0}), vec({-1, 0})});
  CHECK(s.resolvent(vec({0, 0}), 1.0) == vec({-1, 0}));
  CHECK(s.resolvent(vec({0.4, 3}), 1.0) == vec({1, 0}));
  CHECK(!s.convex());
  CHECK(s.value(vec({1, 0})) == 0.0);
  CHECK(s.value(vec({1, 1})) == kInf);
}

TEST_CASE("partial resolvent of the smooth coupling") {
  const auto lay = BlockLayout::uniform(2, 1);
  const auto zero = make_zero_coupling(lay);
  CHECK(resolvent_partial_smooth(*zero, 0, vec({1.5, -2}), 0.7)[0] == 1.5);

  const QuadraticCoupling half(lay, Matrix::Identity(2, 2), Vector::Zero(2));
  CHECK(resolvent_partial_smooth(half, 1, vec({1, 6}), 1.0)[0] == doctest::Approx(3.0));

  const QuadraticCoupling ce(lay, counterexample_q(), Vector::Zero(2));
  const double t = 0.3, a = 1.7, b = -0.4;
  const double want = (a - 2 * t * b) / (1 + 2 * t);
  CHECK(resolvent_partial_smooth(ce, 0, vec({a, b}), t)[0] == doctest::Approx(want).epsilon(1e-14));

  // The same coupling given only through its gradient goes through the inner solver.
  CouplingConstants c{{4, 4}, {0, 0}, true};
  const FunctionCoupling fn(
      lay, [](const Vector& x) { return std::pow(x[0] + x[1], 2); },
      [](const Vector& x) { return Vector(Vector::Constant(2, 2 * (x[0] + x[1]))); }, c);
  const Vector y = resolvent_partial_smooth(fn, 0, vec({a, b}), t);
  CHECK(y[0] == doctest::Approx(want).epsilon(1e-9));
  CHECK(std::abs(y[0] + t * 2 * (y[0] + b) - a) <= 1e-10);

  // Steps with lambda * L > 1 still converge thanks to the damping.
  const Vector y2 = resolvent_partial_smooth(fn, 0, vec({a, b}), 2.0);
  CHECK(std::abs(y2[0] + 2.0 * 2 * (y2[0] + b) - a) <= 1e-10);

  InnerSolveOptions tight{1e-10, 1};
  CHECK_THROWS_AS(resolvent_partial_smooth(fn, 0, vec({a, b}), t, tight), InnerSolveDiverged);
}

TEST_CASE("diagonal indicator partial resolvent") {
  const auto lay = BlockLayout::uniform(3, 2);
  DiagonalIndicatorCoupling d(lay);
  const Vector x = vec({9, 9, 1, 2, 1, 2});
  CHECK(resolvent_partial_smooth(d, 0, x, 1.0) == vec({1, 2}));
  CHECK_THROWS_AS(resolvent_partial_smooth(d, 0, vec({0, 0, 1, 2, 3, 4}), 1.0), EmptyResolvent);
  CHECK(!d.differentiable());
}

TEST_CASE("reflector") {
  CHECK(reflector(vec({1, 2}), vec({1, 2})) == vec({1, 2}));
  CHECK(reflector(vec({0, 0}), vec({2, 0})) == vec({-2, 0}));
  PointSet origin(vec({0}));
  CHECK(reflector(origin.project(vec({3})), vec({3}))[0] == -3.0);
}

TEST_CASE("gradient descent map") {
  const auto lay = BlockLayout::uniform(2, 1);
  CHECK(gradient_descent_map(*make_zero_coupling(lay), StepSchedule::uniform(2, 1.0), vec({1, 2})) ==
        vec({1, 2}));
  const QuadraticCoupling ce(lay, counterexample_q(), Vector::Zero(2));
  CHECK(gradient_descent_map(ce, StepSchedule::uniform(2, 0.25), vec({1, 1})).norm() == 0.0);
  const QuadraticCoupling half(lay, Matrix::Identity(2, 2), Vector::Zero(2));
  CHECK(gradient_descent_map(half, StepSchedule::uniform(2, 1.0), vec({3, -7})).norm() == 0.0);
}

TEST_CASE("derived quadratic constants satisfy the blockwise inequalities") {
  Rng rng(33, 0, 0);
  const BlockLayout lay({2, 1, 2});
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a(5, 5);
    for (int i = 0; i < 5; ++i)
      for (int k = 0; k < 5; ++k) a(i, k) = rng.uniform(-1, 1);
    const Matrix q = 0.5 * (a + a.transpose());
    const QuadraticCoupling f(lay, q, Vector::Zero(5));
    for (int pair = 0; pair < 50; ++pair) {
      const Vector x = testing::random_vector(rng, 5, -3, 3);
      const Vector y = testing::random_vector(rng, 5, -3, 3);
      double lhs = 0, rhs = 0, mono = 0, floor = 0;
      for (int j = 0; j < 3; ++j) {
        const Vector dg = f.partial_gradient(x, j) - f.partial_gradient(y, j);
        const Vector dx = lay.block(x, j) - lay.block(y, j);
        const double l = f.lipschitz()[static_cast<std::size_t>(j)];
        const double tau = f.hypomono()[static_cast<std::size_t>(j)];
        lhs += dg.squaredNorm();
        rhs += l * l * dx.squaredNorm();
        mono += dg.dot(dx);
        floor -= tau * dx.squaredNorm();
      }
      CHECK(lhs <= rhs * (1 + 1e-9) + 1e-9);
      CHECK(floor <= mono + 1e-9);
    }
  }
}

TEST_CASE("gd step bound examples") {
  const auto lay = BlockLayout::uniform(2, 1);
  const QuadraticCoupling ce(lay, counterexample_q(), Vector::Zero(2));
  // Every block of the counterexample has L_j = 4, tau_j = 0.
  CHECK(ce.lipschitz()[0] == doctest::Approx(4).epsilon(1e-12));
  CHECK(ce.lipschitz()[1] == doctest::Approx(4).epsilon(1e-12));
  auto b = gd_step_bound(ce, 0.5);
  CHECK(b.upper[0] == doctest::Approx(0.125).epsilon(1e-12));
  REQUIRE(b.global_upper);
  CHECK(*b.global_upper == doctest::Approx(0.25).epsilon(1e-12));
  b = gd_step_bound(ce, 1.0);
  CHECK(b.upper[0] == doctest::Approx(0.25).epsilon(1e-12));

  CHECK(gd_violation_bound(ce, StepSchedule::uniform(2, 0.125), 0.5, false) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(gd_violation_bound(ce, StepSchedule::uniform(2, 0.125), 0.5) == 0.0);
  CHECK(gd_violation_bound(ce, StepSchedule::uniform(2, 0.25), 0.5) == 0.0);
  CHECK(gd_violation_bound(ce, StepSchedule::uniform(2, 0.3), 0.5) > 0.0);
  CHECK(gd_violation_bound(ce, StepSchedule::uniform(2, 1e-8), 0.5, false) < 1e-13);
  CHECK_THROWS_AS(gd_step_bound(ce, 0.0), InvalidArgument);
}

TEST_CASE("violation below one inside the step intervals") {
  Rng rng(41, 0, 0);
  const auto lay = BlockLayout::uniform(3, 1);
  for (int trial = 0; trial < 500; ++trial) {
    CouplingConstants c;
    for (int j = 0; j < 3; ++j) {
      c.lipschitz.push_back(rng.uniform(0.1, 10));
      c.hypomono.push_back(rng.uniform(0, 5));
    }
    c.convex = false;
    const FunctionCoupling f(
        lay, [](const Vector&) { return 0.0; }, [](const Vector& x) { return Vector(Vector::Zero(x.size())); },
        c);
    const double alpha = rng.uniform(0.05, 0.95);
    const auto b = gd_step_bound(f, alpha);
    std::vector<double> t;
    for (double u : b.upper) t.push_back(u * rng.uniform(0.01, 0.999));
    CHECK(gd_violation_bound(f, StepSchedule(t), alpha) < 1.0);
  }
}

TEST_CASE("empirical submonotonicity") {
  std::vector<std::pair<Vector, Vector>> pairs;
  Rng rng(8, 0, 0);
  for (int i = 0; i < 50; ++i)
    pairs.emplace_back(testing::random_vector(rng, 1, -5, 5), testing::random_vector(rng, 1, -5, 5));
  const auto convex_grad = [](const Vector& u) { return Vector(3.0 * u); };
  CHECK(estimate_submonotonicity(convex_grad, pairs, 0.5) == 0.0);
  // f = -x^2/2: <z - w, u - v> = -lambda (u-v)^2 and the spread is (1-lambda)^2 (u-v)^2.
  const auto concave_grad = [](const Vector& u) { return Vector(-u); };
  const double lambda = 0.5;
  CHECK(estimate_submonotonicity(concave_grad, pairs, lambda) ==
        doctest::Approx(2 * lambda / ((1 - lambda) * (1 - lambda))).epsilon(1e-12));
  CHECK(estimate_submonotonicity(concave_grad, {}, lambda) == 0.0);
  CHECK(estimate_submonotonicity(concave_grad, pairs, 1.0) == kInf);
}
