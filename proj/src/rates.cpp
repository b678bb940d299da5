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

#include "randblock/rates.hpp"

#include <algorithm>
#include <cmath>

#include "randblock/errors.hpp"

namespace randblock {

double GaugeSpec::theta(double t) const {
  if (kind == Kind::Linear) return factor * t;
  if (t <= grid_t.front()) return grid_theta.front();
  if (t >= grid_t.back()) return grid_theta.back();
  const auto it = std::upper_bound(grid_t.begin(), grid_t.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - grid_t.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - grid_t[lo]) / (grid_t[hi] - grid_t[lo]);
  return (1.0 - w) * grid_theta[lo] + w * grid_theta[hi];
}

double GaugeSpec::iterate(double t, std::size_t k) const {
  if (kind == Kind::Linear) return std::pow(factor, static_cast<double>(k)) * t;
  for (std::size_t i = 0; i < k; ++i) t = theta(t);
  return t;
}

double GaugeSpec::partial_sum(double t, std::size_t k) const {
  double s = 0.0, v = t;
  for (std::size_t j = 0; j <= k; ++j) {
    s += v;
    v = theta(v);
  }
  return s;
}

GaugeSpec theta_linear(double kappa, double tau, double epsilon) {
  if (!(kappa > 0.0) || !(tau >= 0.0) || !(epsilon >= 0.0)) {
    throw InadmissibleGauge("gauge parameters must satisfy kappa > 0, tau >= 0, eps >= 0");
  }
  if (kappa < std::sqrt(tau / (1.0 + epsilon))) {
    throw InadmissibleGauge("kappa below sqrt(tau / (1 + eps))");
  }
  const double f2 = (1.0 + epsilon) - tau / (kappa * kappa);
  const double factor = std::sqrt(std::max(0.0, f2));
  if (!(factor > 0.0 && factor < 1.0)) {
    throw InadmissibleGauge("linear gauge factor " + std::to_string(factor) +
                            " is outside (0,1)");
  }
  GaugeSpec g;
  g.kind = GaugeSpec::Kind::Linear;
  g.kappa = kappa;
  g.tau = tau;
  g.epsilon = epsilon;
  g.factor = factor;
  return g;
}

GaugeSpec theta_tabulated(std::vector<double> t, std::vector<double> theta, double tau,
                          double epsilon) {
  if (t.size() != theta.size() || t.size() < 2) {
    throw InadmissibleGauge("tabulated gauge needs matching grids of length >= 2");
  }
  if (t.front() != 0.0) throw InadmissibleGauge("tabulated gauge grid must start at 0");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] > t[i - 1])) throw InadmissibleGauge("tabulated grid must be increasing");
  GaugeSpec g;
  g.kind = GaugeSpec::Kind::Tabulated;
  g.tau = tau;
  g.epsilon = epsilon;
  g.t_bar = t.back();
  g.grid_t = std::move(t);
  g.grid_theta = std::move(theta);
  if (!gauge_is_admissible(g)) throw InadmissibleGauge("tabulated gauge violates 0 < theta < t");
  return g;
}

bool gauge_is_admissible(const GaugeSpec& gauge, int points) {
  if (gauge.theta(0.0) != 0.0) return false;
  const double top = std::isfinite(gauge.t_bar) ? gauge.t_bar : 1.0;
  for (int i = 1; i <= points; ++i) {
    const double t = top * static_cast<double>(i) / points;
    const double th = gauge.theta(t);
    if (!(th > 0.0 && th < t)) return false;
  }
  if (gauge.kind == GaugeSpec::Kind::Tabulated) {
    for (std::size_t i = 1; i < gauge.grid_t.size(); ++i) {
      const double th = gauge.grid_theta[i];
      if (!(th > 0.0 && th < gauge.grid_t[i])) return false;
    }
  }
  return true;
}

double rho_preimage(const GaugeSpec& gauge, double t) {
  if (!(gauge.tau > 0.0)) throw InadmissibleGauge("rho is defined only for tau > 0");
  const double th = gauge.theta(t);
  return std::sqrt(std::max(0.0, ((1.0 + gauge.epsilon) * t * t - th * th) / gauge.tau));
}

double invert_id_minus_theta(const GaugeSpec& gauge, double s) {
  if (!(s >= 0.0)) throw OutOfDomain("argument of (Id - theta)^-1 must be nonnegative");
  if (gauge.kind == GaugeSpec::Kind::Linear) return s / (1.0 - gauge.factor);
  const auto g = [&](double t) { return t - gauge.theta(t); };
  for (std::size_t i = 1; i < gauge.grid_t.size(); ++i) {
    if (!(g(gauge.grid_t[i]) > g(gauge.grid_t[i - 1]))) {
      throw OutOfDomain("Id - theta is not strictly increasing on the grid");
    }
  }
  const double top = g(gauge.t_bar);
  if (s > top) throw OutOfDomain("argument exceeds t_bar - theta(t_bar)");
  if (s == 0.0) return 0.0;
  double lo = 0.0, hi = gauge.t_bar;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) < s ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SequenceVerdict check_fejer(const std::vector<double>& d, double tol_rel, double tol_abs) {
  SequenceVerdict v;
  for (std::size_t k = 0; k + 1 < d.size(); ++k) {
    const double excess = d[k + 1] - (d[k] * (1.0 + tol_rel) + tol_abs);
    v.worst_excess = std::max(v.worst_excess, d[k + 1] - d[k]);
    if (excess > 0.0 && v.pass) {
      v.pass = false;
      v.first_violation = k;
    }
  }
  return v;
}

SequenceVerdict check_gauge_monotone(const std::vector<double>& d, const GaugeSpec& gauge,
                                     double tol_rel, double tol_abs) {
  SequenceVerdict v;
  if (!d.empty() && gauge.kind == GaugeSpec::Kind::Tabulated && !(d.front() < gauge.t_bar)) {
    throw OutOfDomain("initial distance is not below t_bar");
  }
  for (std::size_t k = 0; k + 1 < d.size(); ++k) {
    const double bound = gauge.theta(d[k]);
    v.worst_excess = std::max(v.worst_excess, d[k + 1] - bound);
    if (d[k + 1] > bound * (1.0 + tol_rel) + tol_abs && v.pass) {
      v.pass = false;
      v.first_violation = k;
    }
  }
  return v;
}

namespace {

struct LineFit {
  double slope = 0.0;
  double r2 = 1.0;
};

LineFit least_squares(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  if (syy > 1e-300 * n && sxx > 0.0) {
    double sse = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - (my + f.slope * (xs[i] - mx));
      sse += r * r;
    }
    f.r2 = 1.0 - sse / syy;
  }
  return f;
}

}  // namespace

RateFit fit_linear_rate(const std::vector<double>& d) {
  std::vector<double> k, logk, logd;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0.0) || !std::isfinite(d[i])) continue;
    k.push_back(static_cast<double>(i));
    logk.push_back(std::log(static_cast<double>(i + 1)));
    logd.push_back(std::log(d[i]));
  }
  if (k.size() < 5) {
    throw DegenerateSequence("rate fit needs at least 5 positive entries, got " +
                             std::to_string(k.size()));
  }
  const LineFit geo = least_squares(k, logd);
  const LineFit pow = least_squares(logk, logd);
  RateFit fit;
  fit.rate = std::exp(geo.slope);
  fit.r2_geometric = geo.r2;
  fit.r2_power = pow.r2;
  fit.sublinear = pow.slope < 0.0 && pow.r2 > geo.r2;
  fit.used = k.size();
  return fit;
}

AsymptoticRegularity check_asymptotic_regularity(const std::vector<double>& steps,
                                                 double tolerance) {
  std::vector<double> s;
  for (double v : steps)
    if (std::isfinite(v)) s.push_back(v);
  AsymptoticRegularity r;
  if (s.empty()) return r;
  r.tail_length = std::max<std::size_t>(1, s.size() / 4);
  double sum = 0.0;
  for (std::size_t i = s.size() - r.tail_length; i < s.size(); ++i) sum += s[i];
  r.tail_mean = sum / static_cast<double>(r.tail_length);

  // Squares are summable if the second half decays geometrically or, when a
  // power law fits better, like k^-a with 2a > 1.
  std::vector<double> half(s.begin() + static_cast<long>(s.size() / 2), s.end());
  std::size_t positive = 0;
  for (double v : half)
    if (v > 0.0) ++positive;
  if (positive < 5) {
    r.summable_trend = *std::max_element(half.begin(), half.end()) <= tolerance;
    r.fitted_rate = r.summable_trend ? 0.0 : 1.0;
  } else {
    std::vector<double> k, logk, logd;
    const std::size_t offset = s.size() / 2;
    for (std::size_t i = 0; i < half.size(); ++i) {
      if (!(half[i] > 0.0)) continue;
      k.push_back(static_cast<double>(offset + i));
      logk.push_back(std::log(static_cast<double>(offset + i + 1)));
      logd.push_back(std::log(half[i]));
    }
    const LineFit geo = least_squares(k, logd);
    const LineFit pow = least_squares(logk, logd);
    r.fitted_rate = std::exp(geo.slope);
    const double zero_tail = *std::max_element(half.begin(), half.end());
    const bool power_law = pow.r2 > geo.r2 && pow.slope < 0.0;
    const bool decays = power_law ? 2.0 * (-pow.slope) > 1.0 : r.fitted_rate < 1.0;
    r.summable_trend = decays || zero_tail <= tolerance * 1e-3;
  }
  r.pass = r.tail_mean < tolerance && r.summable_trend;
  return r;
}

double estimate_msr_kappa(const SplittingMap& map, const std::vector<Vector>& samples,
                          const std::vector<Vector>& c_points, double residual_floor) {
  if (c_points.empty()) throw InvalidFixedPoints("kappa estimate needs a nonempty C");
  const auto& lay = map.layout();
  const auto& p = map.block_probs();
  double best = -1.0;
  for (const auto& x : samples) {
    lay.check(x, "sample");
    const double res = (x - map.apply_full(x)).norm();
    if (!(res >= residual_floor)) continue;
    double dist = std::numeric_limits<double>::infinity();
    for (const auto& z : c_points) dist = std::min(dist, weighted_norm(lay, p, x - z));
    best = std::max(best, dist / res);
  }
  if (best < 0.0) throw NoEligibleSamples("every sample has residual below the floor");
  return best;
}

}  // namespace randblock
