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

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "twinbeam/evolution.hpp"
#include "twinbeam/gaussian.hpp"
#include "twinbeam/measurement.hpp"

namespace twinbeam {
namespace {

using std::numbers::sqrt2;

// Midpoint-rule integral of a density over a square centred on `centre`.
template <class F>
double integrate_plane(F density, Complex centre, double half_width, int n) {
  const double h = 2.0 * half_width / n;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Complex z = centre + Complex(-half_width + (i + 0.5) * h, -half_width + (j + 0.5) * h);
      sum += density(z);
    }
  }
  return sum * h * h;
}

TEST(Heterodyne, Vacuum) {
  const auto h = heterodyne_distribution(TwoModeGaussianState::vacuum());
  EXPECT_EQ(h.mean, Complex(0.0));
  EXPECT_DOUBLE_EQ(h.cov2(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(h.cov2(1, 1), 0.5);
  EXPECT_DOUBLE_EQ(h.delta2(), 1.0);
}

TEST(Heterodyne, TwinBeamAtOneThird) {
  const Complex z(1.5, -0.5);
  const auto h = heterodyne_distribution(twin_beam_state({1.0 / 3.0, 0.25 * z, 0.75 * z}));
  EXPECT_LT(std::abs(h.mean - z), 1e-15);
  EXPECT_NEAR(h.delta2(), 0.5, 1e-15);
}

TEST(Heterodyne, IndependentOfDisplacementSplit) {
  const auto h1 = heterodyne_distribution(twin_beam_state({0.5, 1.0, 0.0}));
  const auto h2 = heterodyne_distribution(twin_beam_state({0.5, 0.0, 1.0}));
  EXPECT_LT(max_abs_difference(h1, h2), 1e-15);
}

TEST(Heterodyne, TwinBeamDensityIntegratesToOne) {
  for (double lambda : {0.0, 0.5, 0.9}) {
    const auto h = heterodyne_distribution(twin_beam_state({lambda, Complex(1.0, 1.0), 0.0}));
    const double half = 6.0 * std::sqrt(h.delta2());
    EXPECT_NEAR(integrate_plane([&](Complex z) { return h.pdf(z); }, h.mean, half, 400), 1.0, 1e-8);
  }
}

TEST(Homodyne, VacuumQuadratures) {
  for (Mode m : {Mode::a, Mode::b}) {
    for (Quadrature q : {Quadrature::x, Quadrature::y}) {
      const auto d = homodyne_distribution(TwoModeGaussianState::vacuum(), m, q);
      EXPECT_EQ(d.mean, 0.0);
      EXPECT_EQ(d.var, 0.25);
    }
  }
}

TEST(Homodyne, SqueezedPairQuadratures) {
  const Complex z(1.2, -0.8);
  const auto s = squeezed_pair_state(0.5, z);
  const auto ya = homodyne_distribution(s, Mode::a, Quadrature::y);
  const auto xb = homodyne_distribution(s, Mode::b, Quadrature::x);
  EXPECT_NEAR(ya.var, 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(ya.mean, z.imag() / sqrt2, 1e-15);
  EXPECT_NEAR(xb.var, 1.0 / 12.0, 1e-15);
  EXPECT_NEAR(xb.mean, z.real() / sqrt2, 1e-15);
  // Per-quadrature variance is a quarter of the twin-beam heterodyne variance.
  EXPECT_NEAR(ya.var, twin_beam_variance(0.5) / 4.0, 1e-15);
}

TEST(ProductToHeterodyne, VacuumPair) {
  const auto h = product_to_heterodyne({0.0, 0.25}, {0.0, 0.25});
  EXPECT_DOUBLE_EQ(h.delta2(), 1.0);
  EXPECT_TRUE(h.is_isotropic());
}

TEST(ProductToHeterodyne, MatchesTwinBeamHeterodyne) {
  for (double lambda : {0.0, 0.3, 0.6, 0.9}) {
    const Complex z(2.0, -1.0);
    const auto s = squeezed_pair_state(lambda, z);
    const auto via_homodyne = homodyne_pair_to_heterodyne(s);
    const auto direct = heterodyne_distribution(twin_beam_state({lambda, 0.5 * z, 0.5 * z}));
    EXPECT_LT(max_abs_difference(via_homodyne, direct), 1e-12);
  }
}

TEST(ProductToHeterodyne, IsotropicWhenVariancesEqual) {
  const double delta2 = 0.37;
  const auto h = product_to_heterodyne({0.1, delta2 / 4.0}, {-0.3, delta2 / 4.0});
  EXPECT_TRUE(h.is_isotropic(1e-15));
  EXPECT_NEAR(h.delta2(), delta2, 1e-15);
  EXPECT_LT(std::abs(h.mean - sqrt2 * Complex(0.1, -0.3)), 1e-15);
}

TEST(ProductToHeterodyne, RejectsNegativeVariance) {
  EXPECT_THROW(product_to_heterodyne({0.0, -0.1}, {0.0, 0.25}), DomainError);
}

// The change of variables carries the Jacobian 1/2, so the density is normalized.
TEST(ProductToHeterodyne, ProductDensityNormalizedAndEqualToHeterodyne) {
  const Gaussian1D px{0.4, 0.1}, py{-0.2, 0.06};
  EXPECT_NEAR(integrate_plane([&](Complex z) { return product_density(px, py, z); },
                              sqrt2 * Complex(px.mean, py.mean), 3.0, 400),
              1.0, 1e-8);
  const auto h = product_to_heterodyne(px, py);
  for (const Complex z : {Complex(0.5, -0.3), Complex(0.0, 0.0), Complex(1.0, 0.5)}) {
    EXPECT_NEAR(product_density(px, py, z), h.pdf(z), 1e-13);
  }
}

TEST(PhaseSensitivity, CoherentAgainstMonteCarlo) {
  const auto p = phase_sensitivity(0.0, 10.0);
  EXPECT_NEAR(p.delta_phi, 1.0 / (10.0 * sqrt2), 1e-15);
  EXPECT_TRUE(p.small_angle);
  EXPECT_NEAR(phase_sensitivity_monte_carlo(0.0, 10.0, 1000000, 42), p.delta_phi, 0.01 * p.delta_phi);
}

TEST(PhaseSensitivity, ShrinksWithSqueezingAndScalesWithDelta) {
  EXPECT_LT(phase_sensitivity(0.999999, 1.0).delta_phi, 1e-3);
  for (double lambda : {0.1, 0.5, 0.8}) {
    const double ratio = phase_sensitivity(lambda, 3.0).delta_phi / phase_sensitivity(0.0, 3.0).delta_phi;
    EXPECT_NEAR(ratio, std::sqrt(twin_beam_variance(lambda)), 1e-14);
  }
}

TEST(PhaseSensitivity, FlagsLargeAngles) {
  EXPECT_FALSE(phase_sensitivity(0.0, 1.0).small_angle);
  EXPECT_THROW(phase_sensitivity(0.5, 0.0), DomainError);
}

TEST(PhaseSensitivity, MonteCarloIsSeeded) {
  EXPECT_EQ(phase_sensitivity_monte_carlo(0.3, 5.0, 1000, 9), phase_sensitivity_monte_carlo(0.3, 5.0, 1000, 9));
}

TEST(PhaseAllocation, HundredPhotons) {
  const auto best = optimize_phase_allocation(100.0);
  EXPECT_NEAR(best.delta_phi, 1.0 / (sqrt2 * 100.0), 0.02 / (sqrt2 * 100.0));
}

TEST(PhaseAllocation, FourHundredPhotons) {
  const auto best = optimize_phase_allocation(400.0);
  EXPECT_NEAR(best.delta_phi * 400.0, 1.0 / sqrt2, 0.01 / sqrt2);
}

// Scan oracle for the constrained minimum and the asymptotic even split.
TEST(PhaseAllocation, MatchesGridScanAndSplitsEvenly) {
  for (double nbar : {10.0, 400.0, 4000.0}) {
    const auto best = optimize_phase_allocation(nbar);
    const double lambda_max = std::sqrt(nbar / (nbar + 2.0));
    double scan_best = 1e300;
    for (int i = 1; i < 200000; ++i) {
      const double lambda = lambda_max * i / 200000.0;
      const double signal2 = 2.0 * (nbar - 2.0 * squeezing_photons(lambda));
      if (signal2 <= 0.0) continue;
      scan_best = std::min(scan_best, phase_sensitivity(lambda, std::sqrt(signal2)).delta_phi);
    }
    EXPECT_LE(best.delta_phi, scan_best * (1.0 + 1e-6));
    const double total = 2.0 * squeezing_photons(best.lambda) + 0.5 * best.signal * best.signal;
    EXPECT_NEAR(total, nbar, 1e-9 * nbar);
  }
  EXPECT_NEAR(optimize_phase_allocation(4000.0).squeezing_fraction, 0.5, 0.02);
  EXPECT_THROW(optimize_phase_allocation(0.0), DomainError);
}

TEST(Properties, TwinBeamHeterodyneIsotropic) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int rep = 0; rep < 100; ++rep) {
    const double lambda = 0.245 * (u(rng) + 2.0);
    const auto h = heterodyne_distribution(twin_beam_state({lambda, Complex(u(rng), u(rng)), Complex(u(rng), u(rng))}));
    EXPECT_LT(std::abs(h.cov2(0, 0) - h.cov2(1, 1)), 1e-12);
    EXPECT_LT(std::abs(h.cov2(0, 1)), 1e-12);
    EXPECT_TRUE(h.is_valid());
  }
}

TEST(Properties, EquivalenceChainAcrossGenerators) {
  const std::vector<PhysicalGenerator> gens = {PhysicalGenerator::loss(1.0), PhysicalGenerator::loss(1.0, 0.5),
                                               PhysicalGenerator::gain(0.6, 0.1),
                                               PhysicalGenerator::loss(1.0).with_parametric(0.5),
                                               PhysicalGenerator::loss(0.5).with_parametric(0.8, ParametricKind::psa)};
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (const auto& g : gens) {
    for (int rep = 0; rep < 10; ++rep) {
      const double lambda = 0.24 * (u(rng) + 2.0);
      const Complex z(u(rng), u(rng));
      const double t = 0.5 * (u(rng) + 2.0);
      const auto het = heterodyne_distribution(evolve_state(twin_beam_state({lambda, 0.5 * z, 0.5 * z}), g, t));
      const auto hom = homodyne_pair_to_heterodyne(evolve_state(squeezed_pair_state(lambda, z), conjugate_generator(g), t));
      EXPECT_LT(max_abs_difference(het, hom), 1e-10);
    }
  }
}

}  // namespace
}  // namespace twinbeam
