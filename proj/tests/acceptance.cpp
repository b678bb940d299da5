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

// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

#include "randblock/app.hpp"
#include "support.hpp"

using namespace randblock;
using testing::vec;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

BlockSubsetScheme halves() { return BlockSubsetScheme(2, {{0}, {1}}, {0.5, 0.5}); }

Outcome counterexample_negative() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto ce = counterexample2d(0.25);
  const auto map = ce.make_map(Flavor::ForwardBackward, 0.25, halves());
  const MapFn t1 = [&](const Vector& x) { return map.apply(0, x); };
  CertifyOptions opt;
  opt.n_pairs = 10000;
  opt.refine = true;
  const auto r = certify_pointwise_aafne(t1, ce.region, 0.5, 0.0, opt);
  o.require(!r.pass, "certification passed");
  o.require(r.witness.has_value(), "no witness");
  if (r.witness) {
    const double expand = (t1(r.witness->x) - t1(r.witness->y)).norm() / (r.witness->x - r.witness->y).norm();
    o.require(expand > 1.0, "witness is not expansive (ratio " + fmt(expand) + ")");
  }
  const Vector x = vec({0, 0}), y = vec({0, 1});
  const double ratio = (t1(x) - t1(y)).norm() / (x - y).norm();
  o.require(std::abs(ratio - std::sqrt(1.25)) <= 1e-12, "pair ratio " + fmt(ratio));
  const double secs = seconds_since(t0);
  o.require(secs < 5.0, "runtime " + fmt(secs) + " s");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("max margin ") + fmt(r.max_margin) + ", " + fmt(secs) + " s";
  return o;
}

Outcome counterexample_positive() {
  Outcome o;
  const auto t0 = Clock::now();
  CertifyOptions opt;
  opt.n_pairs = 10000;
  opt.tolerance = 1e-10;
  for (double t : {0.1, 0.25, 0.45}) {
    const auto ce = counterexample2d(t);
    const auto map = ce.make_map(Flavor::ForwardBackward, t, halves());
    PairRegion line = ce.region;
    line.tied = {1};
    const auto r = certify_pointwise_aafne([&](const Vector& x) { return map.apply(0, x); }, line, 0.5, 0.0, opt);
    o.require(r.pass, "(a) t=" + fmt(t) + " margin " + fmt(r.max_margin));
  }
  for (double t : {0.1, 0.2}) {
    const auto ce = counterexample2d(t);
    const auto map = ce.make_map(Flavor::ForwardBackward, t, halves());
    const auto c = composite_constants(map);
    const auto r =
        certify_pointwise_aafne([&](const Vector& x) { return map.apply_full(x); }, ce.region, c.alpha, c.violation, opt);
    o.require(c.violation == 0.0, "(b) t=" + fmt(t) + " violation " + fmt(c.violation));
    o.require(r.pass, "(b) t=" + fmt(t) + " margin " + fmt(r.max_margin));
  }
  {
    const auto ce = counterexample2d(0.25);
    const auto map = ce.make_map(Flavor::ForwardBackward, 0.25, halves());
    const auto c = composite_constants(map);
    o.require(map.block_probs().p == std::vector<double>{0.5, 0.5}, "(c) block probabilities");
    const auto r = certify_aafne_in_expectation(map, ce.region, c.alpha, 0.0, opt);
    o.require(r.pass, "(c) margin " + fmt(r.max_margin));
  }
  const double secs = seconds_since(t0);
  o.require(secs < 30.0, "runtime " + fmt(secs) + " s");
  o.detail += (o.detail.empty() ? "" : "; ") + fmt(secs) + " s";
  return o;
}

Outcome expectation_identities() {
  Outcome o;
  Rng rng(2026, 0, 3);
  const auto lay = BlockLayout::uniform(4, 1);
  double worst = 0.0;
  for (int s = 0; s < 3; ++s) {
    Matrix a(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 4; ++k) a(i, k) = rng.uniform(-1, 1);
    const auto prob = quadratic_l1(a.transpose() * a, testing::random_vector(rng, 4), {0.1, 0.2, 0.3, 0.4}, lay);
    const auto map = prob.make_map(Flavor::ForwardBackward, prob.default_step, testing::random_scheme(rng, 4));
    CertifyOptions opt;
    opt.n_pairs = 1000;
    opt.seed = static_cast<std::uint64_t>(s);
    opt.tolerance = 1e-9;
    const auto r = verify_expectation_identities(map, prob.region, opt);
    worst = std::max(worst, r.max_margin);
    o.require(r.pass, "scheme " + std::to_string(s) + " error " + fmt(r.max_margin));
  }
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("max rel error ") + fmt(worst);
  return o;
}

Outcome transport_oracle() {
  Outcome o;
  const auto t0 = Clock::now();
  Rng rng(77, 0, 0);
  double worst = 0.0;
  for (int inst = 0; inst < 100; ++inst) {
    const int n = 1 + static_cast<int>((rng.next_u64() % 6));
    const int m = 1 + static_cast<int>((rng.next_u64() % 3));
    const auto lay = BlockLayout::uniform(m, 1 + static_cast<int>((rng.next_u64() % 2)));
    const auto p = testing::random_scheme(rng, m).block_probs();
    std::vector<Vector> a, b;
    for (int i = 0; i < n; ++i) {
      a.push_back(testing::random_vector(rng, lay.total_dim(), -3, 3));
      b.push_back(testing::random_vector(rng, lay.total_dim(), -3, 3));
    }
    const auto mu = DiscreteMeasure::empirical(a), nu = DiscreteMeasure::empirical(b);
    const double w = wasserstein2_weighted(mu, nu, lay, p).distance;
    const double brute = std::sqrt(testing::brute_force_assignment(squared_cost_matrix(lay, p, mu, nu)) / n);
    worst = std::max(worst, std::abs(w - brute));
  }
  o.require(worst <= 1e-10, "brute-force gap " + fmt(worst));
  double worst_lp = 0.0;
  for (int n = 1; n <= 8; ++n) {
    for (int rep = 0; rep < 5; ++rep) {
      Matrix c(n, n);
      for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) c(i, k) = rng.uniform(0, 10);
      const double assign = solve_assignment(c).cost / n;
      const double lp = solve_transportation(c, std::vector<double>(n, 1.0 / n), std::vector<double>(n, 1.0 / n)).cost;
      worst_lp = std::max(worst_lp, std::abs(assign - lp));
    }
  }
  o.require(worst_lp <= 1e-10, "assignment vs LP gap " + fmt(worst_lp));
  const double secs = seconds_since(t0);
  o.require(secs < 10.0, "runtime " + fmt(secs) + " s");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("gaps ") + fmt(worst) + " / " + fmt(worst_lp) + ", " +
              fmt(secs) + " s";
  return o;
}

Outcome distributional_convergence() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto ce = counterexample2d(0.25);
  const auto map = ce.make_map(Flavor::ForwardBackward, 0.25, halves());
  const UniformBoxSampler sampler(ce.region.lo, ce.region.hi);
  Ensemble ens = init_ensemble(ce.layout, sampler, 500, 20261014);
  RunOptions opt;
  opt.iterations = 300;
  opt.dw_every = 10;
  opt.targets = {vec({0, 0})};
  const auto traj = run(ens, map, opt);
  std::vector<double> dist, steps;
  for (const auto& r : traj.records) {
    dist.push_back(*r.dw_target);
    if (r.dw_step) steps.push_back(*r.dw_step);
  }
  const double final_w = wasserstein2_weighted(ens.measure(), DiscreteMeasure::point_mass(vec({0, 0})), ce.layout,
                                               map.block_probs())
                             .distance;
  o.require(final_w <= 1e-3, "final distance " + fmt(final_w));
  const auto fej = check_fejer(dist, 1e-3);
  o.require(fej.pass, "Fejer violation at " + std::to_string(fej.first_violation.value_or(0)));
  const auto ar = check_asymptotic_regularity(steps);
  o.require(ar.pass, "asymptotic regularity tail " + fmt(ar.tail_mean));
  const auto fit = fit_linear_rate(dist);
  o.require(fit.rate < 1.0, "rate " + fmt(fit.rate));
  const double secs = seconds_since(t0);
  o.require(secs < 60.0, "runtime " + fmt(secs) + " s");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("W2 ") + fmt(final_w) + ", rate " + fmt(fit.rate) + ", " +
              fmt(secs) + " s";
  return o;
}

Outcome inconsistent_feasibility() {
  Outcome o;
  const auto prob = feasibility(SetDescriptor::point(vec({0, 0})), SetDescriptor::point(vec({2, 0})),
                                FeasibilityCoupling::SquaredDistance);
  const double t = prob.default_step;
  const auto map = prob.make_map(Flavor::DouglasRachford, t, halves());
  const Vector start = 0.5 * (prob.region.lo + prob.region.hi);
  const auto det = iterate_full_map(map, start, 100000, 1e-14);
  const auto chain = enumerate_reachable(map, det.point);
  const UniformBoxSampler sampler(prob.region.lo, prob.region.hi);
  Ensemble ens = init_ensemble(prob.layout, sampler, 1000, 99);
  for (int k = 0; k < 2000; ++k) sbi_step(ens, map);
  const double w = wasserstein2_weighted(ens.measure(), chain.stationary, prob.layout, map.block_probs()).distance;
  o.require(w <= 0.05, "W2 to reference " + fmt(w));
  const auto& pair = *prob.best_approximation_pair;
  const Vector ref = chain.stationary.support.front();
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("W2 ") + fmt(w) + ", reference states " +
              std::to_string(chain.states.size()) + ", block gap " +
              fmt((ref.tail(2) - ref.head(2)).norm()) + " vs set gap " + fmt((pair.second - pair.first).norm());
  return o;
}

Outcome constants() {
  Outcome o;
  Rng rng(5150, 0, 0);
  const auto lay = BlockLayout::uniform(2, 1);
  for (int trial = 0; trial < 3; ++trial) {
    const double tf = rng.uniform(0, 2), th = rng.uniform(0, 2);
    CouplingConstants c{{1.0, 1.0}, {tf, tf}, false};
    auto f = std::make_shared<FunctionCoupling>(
        lay, [](const Vector&) { return 0.0; }, [](const Vector& x) { return Vector(Vector::Zero(x.size())); }, c);
    std::vector<std::shared_ptr<const BlockTerm>> terms = {
        std::make_shared<FiniteSetIndicator>(std::vector<Vector>{vec({0}), vec({1})}, th),
        std::make_shared<ZeroTerm>()};
    const SplittingMap dr(Flavor::DouglasRachford, f, SeparableTerm(lay, terms), StepSchedule::uniform(2, 0.5),
                          halves());
    const auto k = composite_constants(dr);
    o.require(k.alpha == 2.0 / 3.0, "alpha_DR " + fmt(k.alpha));
    o.require(std::abs(k.violation - (tf + th + tf * th)) <= 1e-15, "eps_DR trial " + std::to_string(trial));
  }
  const QuadraticCoupling ce(lay, (Matrix(2, 2) << 2, 2, 2, 2).finished(), Vector::Zero(2),
                             CouplingConstants{{4, 4}, {0, 0}, true});
  const auto b = gd_step_bound(ce, 0.5);
  o.require(std::abs(b.upper[0] - 0.125) <= 1e-12 && std::abs(b.upper[1] - 0.125) <= 1e-12, "block interval");
  o.require(b.global_upper && std::abs(*b.global_upper - 0.25) <= 1e-12, "global bound");
  const auto b1 = gd_step_bound(ce, 1.0);
  o.require(std::abs(b1.upper[0] - 0.25) <= 1e-12, "alpha 1 interval");
  o.require(std::abs(gd_violation_bound(ce, StepSchedule::uniform(2, 0.125), 0.5, false) - 0.5) <= 1e-12,
            "violation at 1/8");
  o.require(gd_violation_bound(ce, StepSchedule::uniform(2, 0.2), 0.5) == 0.0, "convex global step violation");
  o.require(gd_violation_bound(ce, StepSchedule::uniform(2, 1e-9), 0.5, false) <= 1e-12, "vanishing step");
  return o;
}

Outcome gauges() {
  Outcome o;
  double worst_rho = 0.0, worst_inv = 0.0;
  for (auto [kappa, tau, eps] : {std::tuple{1.0, 0.5, 0.0}, std::tuple{2.0, 3.0, 0.1}, std::tuple{3.0, 1.0, 0.0}}) {
    const auto g = theta_linear(kappa, tau, eps);
    for (int i = 0; i <= 1000; ++i) {
      const double t = 20.0 * i / 1000;
      const double th = g.theta(t);
      const double u = std::sqrt(std::max(0.0, ((1 + eps) * t * t - th * th) / tau));
      worst_rho = std::max(worst_rho, std::abs(kappa * u - t));
      const double s = t - th;
      const double back = invert_id_minus_theta(g, s);
      worst_inv = std::max(worst_inv, std::abs(back - t));
    }
  }
  o.require(worst_rho <= 1e-10, "rho round trip " + fmt(worst_rho));
  o.require(worst_inv <= 1e-10, "inverse round trip " + fmt(worst_inv));
  const auto g = theta_linear(1.0, 0.36, 0.0);
  std::vector<double> d{1.0};
  for (int k = 0; k < 50; ++k) d.push_back(d.back() * g.factor);
  o.require(check_gauge_monotone(d, g).pass, "exact factor rejected");
  const double f2 = g.factor - 1e-6;
  const auto tighter = theta_linear(1.0, 1.0 - f2 * f2, 0.0);
  o.require(!check_gauge_monotone(d, tighter).pass, "reduced factor accepted");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("round trips ") + fmt(worst_rho) + " / " + fmt(worst_inv);
  return o;
}

Outcome paracontraction() {
  Outcome o;
  const auto ce = counterexample2d(0.25);
  const auto map = ce.make_map(Flavor::ForwardBackward, 0.25, halves());
  CertifyOptions opt;
  opt.n_pairs = 10000;
  const auto r = certify_paracontraction_in_expectation(map, {vec({0, 0})}, ce.region, opt, 1e-8);
  o.require(r.pass, "failed");
  o.require(r.max_margin < 0.0, "not strict");
  o.detail += (o.detail.empty() ? "" : "; ") + std::string("eligible ") + std::to_string(r.eligible) +
              ", max margin " + fmt(r.max_margin);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome reproducibility() {
  Outcome o;
  const auto cfg = parse_config(nlohmann::json::parse(R"({
    "problem": {"id": "counterexample2d", "params": {"t": 0.25}},
    "flavor": "FB",
    "scheme": {"subsets": [[1], [2]], "probabilities": [0.5, 0.5]},
    "steps": 0.25,
    "ensemble": {"size": 200, "init": {"kind": "uniform_box", "lo": [-10, -10], "hi": [10, 10]}},
    "iterations": 100,
    "snapshot_every": 50,
    "dw_every": 10,
    "threads": 2,
    "seed": 424242
  })"));
  const fs::path base = fs::temp_directory_path() / "randblock_acceptance";
  fs::remove_all(base);
  cmd_run(cfg, base / "a");
  cmd_run(cfg, base / "b");
  const std::string ta = slurp(base / "a" / "trajectory.csv");
  o.require(!ta.empty(), "empty trajectory");
  o.require(ta == slurp(base / "b" / "trajectory.csv"), "trajectory differs");
  o.require(slurp(base / "a" / "snapshot_100.csv") == slurp(base / "b" / "snapshot_100.csv"), "snapshot differs");
  o.detail += (o.detail.empty() ? "" : "; ") + std::to_string(ta.size()) + " bytes";
  fs::remove_all(base);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"counterexample single-block map is not averaged on the plane", counterexample_negative},
      {"counterexample positive regularity claims", counterexample_positive},
      {"expectation identities on random schemes", expectation_identities},
      {"optimal transport oracle equivalence", transport_oracle},
      {"distributional convergence in the consistent convex case", distributional_convergence},
      {"inconsistent feasibility long-run law", inconsistent_feasibility},
      {"regularity constants", constants},
      {"gauge machinery", gauges},
      {"paracontraction in expectation", paracontraction},
      {"run reproducibility", reproducibility},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    if (!out.pass) ++failures;
    std::printf("%s criterion %zu: %s (%s)\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
