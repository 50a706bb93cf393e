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

// Detection statistics: unconventional heterodyne detection of the complex
// photocurrent Z = a + b^dag, ordinary homodyne detection of a single
// quadrature, and the coordinate map z = sqrt2 (x + i y) relating a homodyne
// pair (x from X_b, y from Y_a) to the heterodyne outcome.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

#include "twinbeam/distributions.hpp"
#include "twinbeam/errors.hpp"
#include "twinbeam/gaussian.hpp"
#include "twinbeam/optimize.hpp"

namespace twinbeam {

inline ComplexGaussian heterodyne_distribution(const TwoModeGaussianState& state) {
  Eigen::Matrix<double, 2, 4> proj;
  proj << 1, 0, 1, 0,
          0, 1, 0, -1;
  ComplexGaussian out;
  out.mean = state.amplitude(Mode::a) + std::conj(state.amplitude(Mode::b));
  out.cov2 = proj * state.cov() * proj.transpose();
  out.cov2 = 0.5 * (out.cov2 + out.cov2.transpose()).eval();
  return out;
}

inline Gaussian1D homodyne_distribution(const TwoModeGaussianState& state, Mode mode, Quadrature q) {
  const int i = quadrature_index(mode, q);
  return {state.mean()(i), state.cov()(i, i)};
}

// px: homodyne of X_b, py: homodyne of Y_a.
inline ComplexGaussian product_to_heterodyne(const Gaussian1D& px, const Gaussian1D& py) {
  detail::require_domain(px.var >= 0.0 && py.var >= 0.0, "homodyne variances must be non-negative");
  ComplexGaussian out;
  out.mean = std::numbers::sqrt2 * std::complex<double>(px.mean, py.mean);
  out.cov2 << 2.0 * px.var, 0.0, 0.0, 2.0 * py.var;
  return out;
}

// P'(z) = P_a(Im z/sqrt2) P_b(Re z/sqrt2)/2, the homodyne pair density in
// heterodyne coordinates.
inline double product_density(const Gaussian1D& px, const Gaussian1D& py, std::complex<double> z) {
  return 0.5 * py.pdf(z.imag() / std::numbers::sqrt2) * px.pdf(z.real() / std::numbers::sqrt2);
}

inline ComplexGaussian homodyne_pair_to_heterodyne(const TwoModeGaussianState& state) {
  return product_to_heterodyne(homodyne_distribution(state, Mode::b, Quadrature::x),
                               homodyne_distribution(state, Mode::a, Quadrature::y));
}

struct PhaseSensitivity {
  double delta_phi = 0.0;
  bool small_angle = true;  // false once delta_phi > 0.3
};

// Small-angle r.m.s. spread of arg Z for an isotropic Gaussian of variance
// Delta_lambda^2 centred at distance `signal` from the origin.
inline PhaseSensitivity phase_sensitivity(double lambda, double signal) {
  detail::require_domain(signal > 0.0, "signal amplitude must be positive");
  const double dphi = std::sqrt(twin_beam_variance(lambda)) / (std::numbers::sqrt2 * signal);
  return {dphi, dphi <= 0.3};
}

// Sample standard deviation of arg z for z drawn from the same distribution.
inline double phase_sensitivity_monte_carlo(double lambda, double signal, int samples, std::uint64_t seed) {
  detail::require_domain(signal > 0.0, "signal amplitude must be positive");
  detail::require_domain(samples >= 2, "at least two samples are required");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, std::sqrt(0.5 * twin_beam_variance(lambda)));
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double re = signal + noise(rng);
    const double im = noise(rng);
    const double phi = std::atan2(im, re);
    sum += phi;
    sum_sq += phi * phi;
  }
  const double mean = sum / samples;
  return std::sqrt((sum_sq - samples * mean * mean) / (samples - 1));
}

struct PhaseAllocation {
  double lambda = 0.0;
  double signal = 0.0;
  double delta_phi = 0.0;
  double squeezing_fraction = 0.0;  // share of nbar spent on 2 lambda^2/(1 - lambda^2)
};

// Minimizes delta_phi over the symmetric twin-beam family at fixed total
// photon number nbar = 2 lambda^2/(1 - lambda^2) + |z|^2/2.
inline PhaseAllocation optimize_phase_allocation(double nbar) {
  detail::require_domain(nbar > 0.0, "total photon number must be positive");
  const double lambda_max = std::sqrt(nbar / (nbar + 2.0));
  const auto signal_sq = [nbar](double lambda) {
    return std::max(0.0, 2.0 * (nbar - 2.0 * lambda * lambda / (1.0 - lambda * lambda)));
  };
  // delta_phi^2 = 1/(2 |z|^2/Delta^2): maximize the signal-to-noise ratio.
  const auto snr = [&](double lambda) { return signal_sq(lambda) * (1.0 + lambda) / (1.0 - lambda); };
  const ScalarOptimum best = golden_section_maximize(snr, 0.0, lambda_max);
  PhaseAllocation out;
  out.lambda = best.x;
  out.signal = std::sqrt(signal_sq(best.x));
  out.delta_phi = phase_sensitivity(best.x, out.signal).delta_phi;
  out.squeezing_fraction = 2.0 * squeezing_photons(best.x) / nbar;
  return out;
}

}  // namespace twinbeam
