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

#include "doctest.h"
#include "randblock/errors.hpp"
#include "randblock/rates.hpp"
#include "support.hpp"

using namespace randblock;
using testing::vec;

namespace {

/// Linear gauge whose factor is exactly sqrt(1 - tau) for kappa = 1, eps = 0.
GaugeSpec gauge_with_factor(double f) { return theta_linear(1.0, 1.0 - f * f, 0.0); }

std::vector<double> geometric(double c, double r, int n) {
  std::vector<double> d{c};
  for (int k = 1; k < n; ++k) d.push_back(d.back() * r);
  return d;
}

}  // namespace

TEST_CASE("linear gauge construction") {
  const auto g = theta_linear(1.0, 0.5, 0.0);
  CHECK(g.factor == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(g.theta(2.0) == doctest::Approx(2 * 0.70710678118654752));
  CHECK(gauge_is_admissible(g));
  CHECK(theta_linear(1e6, 0.5, 0.0).factor > 1 - 1e-12);
  CHECK_THROWS_AS(theta_linear(1.0, 0.0, 0.0), InadmissibleGauge);
  CHECK_THROWS_AS(theta_linear(1.0, 0.0, 0.3), InadmissibleGauge);
  CHECK_THROWS_AS(theta_linear(0.5, 1.0, 0.0), InadmissibleGauge);
  CHECK_THROWS_AS(theta_linear(2.0, 0.1, 0.5), InadmissibleGauge);
}

TEST_CASE("linear gauge recovers rho(t) = kappa t") {
  for (auto [kappa, tau, eps] : {std::tuple{1.0, 0.5, 0.0}, std::tuple{2.0, 3.0, 0.1}, std::tuple{1.5, 2.0, 0.05}}) {
    const auto g = theta_linear(kappa, tau, eps);
    for (int i = 1; i <= 1000; ++i) {
      const double t = 10.0 * i / 1000;
      CHECK(std::abs(kappa * rho_preimage(g, t) - t) <= 1e-10);
    }
  }
}

TEST_CASE("inverse of Id - theta") {
  const auto half = gauge_with_factor(0.5);
  CHECK(half.factor == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(invert_id_minus_theta(half, 0.0) == 0.0);
  CHECK(invert_id_minus_theta(half, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(invert_id_minus_theta(half, -1.0), OutOfDomain);

  const auto tab = theta_tabulated({0, 1, 2, 4}, {0, 0.5, 0.8, 1.0});
  double prev = -1;
  for (int i = 0; i <= 1000; ++i) {
    const double s = (4 - 1.0) * i / 1000;
    const double t = invert_id_minus_theta(tab, s);
    CHECK(std::abs(t - tab.theta(t) - s) <= 1e-10);
    CHECK(t > prev);
    prev = t;
    const double tl = invert_id_minus_theta(half, s);
    CHECK(std::abs(tl - half.theta(tl) - s) <= 1e-10);
  }
  CHECK_THROWS_AS(invert_id_minus_theta(tab, 3.5), OutOfDomain);
  CHECK_THROWS_AS(theta_tabulated({0, 1}, {0, 1.2}), InadmissibleGauge);
  CHECK_THROWS_AS(theta_tabulated({0.5, 1}, {0, 0.2}), InadmissibleGauge);
  // Id - theta flat on [1, 2]: inversion is refused.
  const auto flat = theta_tabulated({0, 1, 2}, {0, 0.5, 1.5});
  CHECK_THROWS_AS(invert_id_minus_theta(flat, 0.2), OutOfDomain);
}

TEST_CASE("iterates and partial sums of a linear gauge") {
  const auto g = gauge_with_factor(0.8);
  const double t = 3.0;
  double v = t;
  for (std::size_t k = 0; k < 60; ++k) {
    CHECK(g.iterate(t, k) == doctest::Approx(v).epsilon(1e-14));
    v *= g.factor;
  }
  const double total = t / (1 - g.factor);
  for (std::size_t k = 0; k < 200; k += 10) {
    const double tail = total - g.partial_sum(t, k);
    CHECK(std::abs(tail - t * std::pow(g.factor, double(k + 1)) / (1 - g.factor)) <= 1e-10);
  }
}

TEST_CASE("Fejer check") {
  CHECK(check_fejer({2, 2, 2, 2}).pass);
  CHECK(check_fejer({1, 0.5, 0.25}).pass);
  const auto v = check_fejer({1, 1.2, 1.0});
  CHECK(!v.pass);
  CHECK(v.first_violation == std::optional<std::size_t>(0));
  CHECK(check_fejer({1, 1.0005}).pass);
  CHECK(check_fejer({}).pass);
}

TEST_CASE("gauge monotonicity") {
  const auto half = gauge_with_factor(0.5);
  CHECK(check_gauge_monotone({1, 0.5, 0.25}, half).pass);
  CHECK(!check_gauge_monotone({1, 0.7}, half).pass);
  const auto g = gauge_with_factor(0.7);
  const auto d = geometric(1.0, g.factor, 20);
  CHECK(check_gauge_monotone(d, g).pass);
  CHECK(!check_gauge_monotone(d, gauge_with_factor(g.factor - 1e-6)).pass);
  CHECK(!check_gauge_monotone({1, 1, 1, 1}, g).pass);
}

TEST_CASE("asymptotic regularity") {
  CHECK(check_asymptotic_regularity(geometric(3.0, 0.5, 60)).pass);
  const auto c = check_asymptotic_regularity(std::vector<double>(60, 0.2));
  CHECK(!c.pass);
  CHECK(c.tail_mean == doctest::Approx(0.2));
  std::vector<double> exact_zero(40, 0.0);
  exact_zero[0] = 1.0;
  CHECK(check_asymptotic_regularity(exact_zero).pass);
  // Slow power decay k^-1/4 is not square-summable.
  std::vector<double> slow;
  for (int k = 1; k <= 200; ++k) slow.push_back(1e-5 * std::pow(k, -0.25));
  CHECK(!check_asymptotic_regularity(slow).pass);
}

TEST_CASE("linear rate fit") {
  const auto f = fit_linear_rate(geometric(3.0, 0.5, 30));
  CHECK(std::abs(f.rate - 0.5) <= 1e-10);
  CHECK(!f.sublinear);
  std::vector<double> inv;
  for (int k = 1; k <= 2000; ++k) inv.push_back(1.0 / k);
  const auto s = fit_linear_rate(inv);
  CHECK(s.rate > 0.99);
  CHECK(s.rate < 1.0);
  CHECK(s.sublinear);
  CHECK(fit_linear_rate(std::vector<double>(10, 4.0)).rate == 1.0);
  CHECK_THROWS_AS(fit_linear_rate({1, 0.5, 0, -1, 0.1}), DegenerateSequence);
}

TEST_CASE("metric subregularity constant") {
  const auto lay1 = BlockLayout::uniform(1, 1);
  std::vector<std::shared_ptr<const BlockTerm>> t = {
      std::make_shared<IndicatorTerm>(std::make_shared<PointSet>(vec({0})))};
  const SplittingMap proj(Flavor::ForwardBackward, make_zero_coupling(lay1), SeparableTerm(lay1, t),
                          StepSchedule::uniform(1, 1.0), BlockSubsetScheme::full(1));
  std::vector<Vector> samples;
  Rng rng(1, 0, 0);
  for (int i = 0; i < 100; ++i) samples.push_back(testing::random_vector(rng, 1, -5, 5));
  CHECK(estimate_msr_kappa(proj, samples, {vec({0})}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(estimate_msr_kappa(proj, {vec({0}), vec({0})}, {vec({0})}), NoEligibleSamples);

  // Gradient step on 1/2 x^T diag(1,4) x: x - T x = t Q x, worst along the eigenvalue 1.
  const auto lay2 = BlockLayout::uniform(2, 1);
  Matrix q = Matrix::Zero(2, 2);
  q(0, 0) = 1;
  q(1, 1) = 4;
  const double step = 0.1;
  const SplittingMap gd(Flavor::ForwardBackward, std::make_shared<QuadraticCoupling>(lay2, q, Vector::Zero(2)),
                        SeparableTerm::zero(lay2), StepSchedule::uniform(2, step), BlockSubsetScheme::full(2));
  std::vector<Vector> pts = {vec({1, 0}), vec({0, 1}), vec({1, 1}), vec({-2, 0.3})};
  CHECK(estimate_msr_kappa(gd, pts, {vec({0, 0})}) == doctest::Approx(1.0 / (step * 1.0)).epsilon(1e-12));
  CHECK(estimate_msr_kappa(gd, {vec({0, 2})}, {vec({0, 0})}) == doctest::Approx(1.0 / (step * 4.0)).epsilon(1e-12));
}
