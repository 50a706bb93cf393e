// Copyright 2026 The twinbeam Authors
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

// Mutual information of the twin-beam (equivalently squeezed-pair) channel
// with a Gaussian prior under a mean-photon constraint. All values in nats.

#pragma once

#include <cmath>
#include <numbers>
#include <sstream>

#include "twinbeam/errors.hpp"
#include "twinbeam/gaussian.hpp"
#include "twinbeam/optimize.hpp"

namespace twinbeam {

struct MutualInfoInput {
  double sigma2 = 0.0;  // prior variance of the complex symbol
  double g = 1.0;       // gain of the conditional mean
  double delta2 = 1.0;  // conditional variance
};

struct ChannelParams {
  double photons = 0.0;  // N, photons per mode
  double lambda = 0.0;
  double gamma = 0.0;
  double nbar = 0.0;
  double k = 0.0;
};

struct CapacityPoint {
  double t = 0.0;
  double info = 0.0;
  ChannelParams params;
};

struct LambdaOptimum {
  double lambda = 0.0;
  double info = 0.0;
};

inline double to_bits(double nats) { return nats / std::numbers::ln2; }

// I = ln(1 + g^2 sigma^2/Delta^2)
inline double gaussian_mutual_info(const MutualInfoInput& in) {
  detail::require_domain(in.delta2 > 0.0, "conditional variance must be positive");
  detail::require_domain(in.sigma2 >= 0.0, "prior variance must be non-negative");
  return std::log1p(in.g * in.g * in.sigma2 / in.delta2);
}

// sigma^2 = 4(N - lambda^2/(1 - lambda^2))
inline double prior_variance(double photons, double lambda) {
  detail::require_domain(photons >= 0.0, "photon number must be non-negative");
  const double squeezing = squeezing_photons(lambda);
  if (squeezing > photons * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "squeezing photons " << squeezing << " exceed the budget N = " << photons;
    throw PowerConstraintError(msg.str());
  }
  return std::max(0.0, 4.0 * (photons - squeezing));
}

// Largest lambda compatible with the power constraint.
inline double max_feasible_lambda(double photons) {
  detail::require_domain(photons >= 0.0, "photon number must be non-negative");
  return std::sqrt(photons / (photons + 1.0));
}

// I = ln(1 + 4(N - lambda^2/(1-lambda^2)) / [(D/Q)(e^{2Qt} - 1) + Delta_lambda^2])
inline double mutual_info_channel(double photons, double lambda, double q, double d, double t) {
  detail::require_domain(t >= 0.0, "time must be non-negative");
  const double sigma2 = prior_variance(photons, lambda);
  const double x = q * t;
  const double added = std::abs(x) < 1e-8 ? 2.0 * d * t * (1.0 + x) : d * std::expm1(2.0 * x) / q;
  return std::log1p(sigma2 / (added + twin_beam_variance(lambda)));
}

// Lossless optimum lambda = N/(N+1), I = 2 ln(1 + 2N).
inline LambdaOptimum capacity_ideal(double photons) {
  detail::require_domain(photons >= 0.0, "photon number must be non-negative");
  return {photons / (photons + 1.0), 2.0 * std::log1p(2.0 * photons)};
}

namespace detail {

inline void require_lossy_args(double photons, double gamma, double nbar, double t) {
  require_domain(photons >= 0.0 && gamma >= 0.0 && nbar >= 0.0 && t >= 0.0,
                 "photons, damping rate, thermal photons and time must be non-negative");
}

}  // namespace detail

// Damping Gamma with nbar thermal photons at lambda = N/(N+1).
inline double mutual_info_lossy(double photons, double gamma, double nbar, double t) {
  detail::require_lossy_args(photons, gamma, nbar, t);
  const double noise = 1.0 + (2.0 * photons + 1.0) * (2.0 * nbar + 1.0) * std::expm1(gamma * t);
  return std::log1p(4.0 * photons * (photons + 1.0) / noise);
}

// Loss compensated by distributed parametric amplification with K = Gamma/2.
inline double mutual_info_compensated(double photons, double gamma, double nbar, double t) {
  detail::require_lossy_args(photons, gamma, nbar, t);
  const double noise = 1.0 + (2.0 * photons + 1.0) * (2.0 * nbar + 1.0) * gamma * t;
  return std::log1p(4.0 * photons * (photons + 1.0) / noise);
}

// N(t) = [N0 + nbar - 1/2 + (N0 - nbar + 1/2) e^{-2 Gamma t} + Gamma(2 nbar + 1) t]/2
//
// Under loss plus K = Gamma/2 this is the growth of <a^dag a + b^dag b> for
// inputs with Re<ab> = 0, N0 being the initial value of that sum.
inline double photon_growth(double n0, double gamma, double nbar, double t) {
  detail::require_lossy_args(n0, gamma, nbar, t);
  return 0.5 * (n0 + nbar - 0.5 + (n0 - nbar + 0.5) * std::exp(-2.0 * gamma * t) + gamma * (2.0 * nbar + 1.0) * t);
}

// Maximizes mutual_info_channel over lambda in [0, max_feasible_lambda(N)].
inline LambdaOptimum optimize_lambda(double photons, double q, double d, double t) {
  const double hi = max_feasible_lambda(photons);
  if (hi == 0.0) return {0.0, mutual_info_channel(photons, 0.0, q, d, t)};
  const auto info = [&](double lambda) { return mutual_info_channel(photons, std::min(lambda, hi), q, d, t); };
  const ScalarOptimum best = golden_section_maximize(info, 0.0, hi, 1e-10);
  return {best.x, best.value};
}

// ln(1 + N) per mode: one lossless coherent-state channel with heterodyne
// detection.
inline double coherent_reference(double photons) {
  detail::require_domain(photons >= 0.0, "photon number must be non-negative");
  return std::log1p(photons);
}

}  // namespace twinbeam
