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

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "randblock/blockspace.hpp"
#include "randblock/splitting.hpp"

namespace randblock {

/// Gauge function theta on [0, t_bar]. Linear gauges are theta(t) = factor * t;
/// tabulated gauges interpolate linearly between grid points.
struct GaugeSpec {
  enum class Kind { Linear, Tabulated };

  Kind kind = Kind::Linear;
  double kappa = 0.0;
  double tau = 0.0;
  double epsilon = 0.0;
  double factor = 0.0;
  std::vector<double> grid_t;
  std::vector<double> grid_theta;
  double t_bar = std::numeric_limits<double>::infinity();

  double theta(double t) const;
  /// k-fold composition theta^(k)(t).
  double iterate(double t, std::size_t k) const;
  /// Partial sum s_k(t) = sum_{j=0}^{k} theta^(j)(t), with theta^(0) = Id.
  double partial_sum(double t, std::size_t k) const;
};

/// theta(t) = sqrt((1 + eps) - tau / kappa^2) * t. Throws InadmissibleGauge
/// unless kappa >= sqrt(tau / (1 + eps)) and the factor lies in (0,1).
GaugeSpec theta_linear(double kappa, double tau, double epsilon);

/// Piecewise linear gauge through (t_i, theta_i). The grid must start at 0 and
/// be strictly increasing. Throws InadmissibleGauge if 0 < theta < t fails.
GaugeSpec theta_tabulated(std::vector<double> t, std::vector<double> theta, double tau = 0.0,
                          double epsilon = 0.0);

/// Checks theta(0) = 0 and 0 < theta(t) < t on a grid of \p points points in (0, t_bar].
bool gauge_is_admissible(const GaugeSpec& gauge, int points = 1000);

/// u(t) = sqrt(((1 + eps) t^2 - theta(t)^2) / tau), the point where the gauge
/// rho attached to theta takes the value t, i.e. rho(u(t)) = t. For linear
/// gauges rho(u) = kappa * u.
double rho_preimage(const GaugeSpec& gauge, double t);

/// Solves t - theta(t) = s. Linear gauges return s / (1 - factor); tabulated
/// ones use bisection to 1e-12. Throws OutOfDomain if s is negative or
/// exceeds t_bar - theta(t_bar).
double invert_id_minus_theta(const GaugeSpec& gauge, double s);

struct SequenceVerdict {
  bool pass = true;
  std::optional<std::size_t> first_violation;
  /// Largest excess d_{k+1} - bound_k over the sequence (negative when slack).
  double worst_excess = -std::numeric_limits<double>::infinity();
};

SequenceVerdict check_fejer(const std::vector<double>& d, double tol_rel = 1e-3,
                            double tol_abs = 1e-12);

SequenceVerdict check_gauge_monotone(const std::vector<double>& d, const GaugeSpec& gauge,
                                     double tol_rel = 1e-10, double tol_abs = 1e-14);

struct AsymptoticRegularity {
  bool pass = false;
  double tail_mean = 0.0;
  std::size_t tail_length = 0;
  /// Fitted per-entry factor of the step sequence over its second half.
  double fitted_rate = 1.0;
  bool summable_trend = false;
};

AsymptoticRegularity check_asymptotic_regularity(const std::vector<double>& steps,
                                                 double tolerance = 1e-4);

/// Largest ratio min_z ||x - z||_p / ||x - T_1 x|| over samples whose residual
/// is at least \p residual_floor. Throws NoEligibleSamples if none qualify.
double estimate_msr_kappa(const SplittingMap& map, const std::vector<Vector>& samples,
                          const std::vector<Vector>& c_points, double residual_floor = 1e-10);

struct RateFit {
  double rate = 1.0;
  double r2_geometric = 1.0;
  double r2_power = 1.0;
  bool sublinear = false;
  std::size_t used = 0;
};

/// Exponentiated least-squares slope of log d_k against k. Non-positive and
/// non-finite entries are dropped; throws DegenerateSequence if fewer than
/// five remain.
RateFit fit_linear_rate(const std::vector<double>& d);

struct RateReport {
  RateFit fit;
  std::optional<double> theoretical_factor;
  SequenceVerdict fejer;
  std::optional<SequenceVerdict> gauge_monotone;
  std::optional<AsymptoticRegularity> asymptotic;
  std::optional<double> kappa_hat;
};

}  // namespace randblock
