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

#include "twinbeam/fock.hpp"
#include "twinbeam/gaussian.hpp"
#include "twinbeam/measurement.hpp"

namespace twinbeam {
namespace {

using std::numbers::sqrt2;

Mat4 cross_block_of(const TwoModeGaussianState& s) {
  Mat4 m = Mat4::Zero();
  m.block<2, 2>(0, 2) = s.cov().block<2, 2>(0, 2);
  return m;
}

TEST(TwinBeamState, VacuumAtZeroLambda) {
  const auto s = twin_beam_state({0.0, {}, {}});
  EXPECT_LT(s.mean().cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((s.cov() - 0.25 * Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(TwinBeamState, PhotonsPerModeAtHalf) {
  EXPECT_NEAR(twin_beam_state({0.5, {}, {}}).photons_per_mode(), 1.0 / 3.0, 1e-12);
}

// Second moments checked against the number-basis expansion.
TEST(TwinBeamState, CovarianceMatchesFockOracle) {
  const auto s = twin_beam_state({0.5, {}, {}});
  const auto fock_moments = fock::moments_fock(fock::twin_beam_fock(0.5, 40));
  EXPECT_NEAR(fock_moments.cov(0, 0), 5.0 / 12.0, 1e-10);
  EXPECT_NEAR(fock_moments.cov(0, 2), -1.0 / 3.0, 1e-10);
  EXPECT_NEAR(fock_moments.cov(1, 3), 1.0 / 3.0, 1e-10);
  EXPECT_LT(fock::max_abs_difference(fock_moments, s), 1e-10);
}

TEST(TwinBeamState, RejectsLambdaOutsideUnitInterval) {
  EXPECT_THROW(twin_beam_state({1.0, {}, {}}), DomainError);
  EXPECT_THROW(twin_beam_state({-0.1, {}, {}}), DomainError);
}

TEST(TwinBeamState, PhotonBudget) {
  const Complex v(0.7, -0.2), w(-0.3, 1.1);
  const double lambda = 0.4;
  const auto s = twin_beam_state({lambda, v, w});
  // Per-mode average over both modes of Var X + Var Y - 1/2 + <X>^2 + <Y>^2.
  double n = 0.0;
  for (int m = 0; m < 2; ++m) {
    const int x = 2 * m;
    n += s.cov()(x, x) + s.cov()(x + 1, x + 1) - 0.5 + s.mean()(x) * s.mean()(x) + s.mean()(x + 1) * s.mean()(x + 1);
  }
  n /= 2.0;
  EXPECT_NEAR(n, squeezing_photons(lambda) + 0.5 * std::norm(v) + 0.5 * std::norm(w), 1e-12);
  EXPECT_NEAR(s.photons_per_mode(), n, 1e-12);
}

TEST(TwinBeamState, HeterodyneVarianceIndependentOfSplit) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (double lambda : {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99}) {
    for (int rep = 0; rep < 5; ++rep) {
      const Complex v(u(rng), u(rng)), w(u(rng), u(rng));
      const auto het = heterodyne_distribution(twin_beam_state({lambda, v, w}));
      EXPECT_NEAR(het.delta2(), (1.0 - lambda) / (1.0 + lambda), 1e-12);
      EXPECT_TRUE(het.is_isotropic(1e-12));
      EXPECT_LT(std::abs(het.mean - (v + w)), 1e-12);
    }
  }
}

TEST(TwinBeamState, AmplifiedCoherentPairRouteAgrees) {
  for (double lambda : {0.0, 0.5, 0.8}) {
    const Complex z(1.0, -2.0);
    const TwinBeamSpec spec{lambda, 0.5 * z, 0.5 * z};
    EXPECT_LT(max_abs_difference(amplified_coherent_pair_state(spec), twin_beam_state(spec)), 1e-12);
    const TwinBeamSpec uneven{lambda, Complex(0.3, 0.2), Complex(-1.0, 0.5)};
    EXPECT_LT(max_abs_difference(amplified_coherent_pair_state(uneven), twin_beam_state(uneven)), 1e-12);
  }
}

TEST(SqueezedPairState, VacuumAtZero) {
  EXPECT_LT(max_abs_difference(squeezed_pair_state(0.0, {}), TwoModeGaussianState::vacuum()), 1e-15);
}

// Reference values read off the frequency-converted twin beam.
TEST(SqueezedPairState, MomentsAtHalf) {
  const Complex z = 2.0;
  const auto s = squeezed_pair_state(0.5, z);
  const auto ref = apply_unitary(twin_beam_state({0.5, 1.0, 1.0}), symplectic_frequency_conversion());
  EXPECT_NEAR(ref.cov()(1, 1), 1.0 / 12.0, 1e-12);
  EXPECT_NEAR(ref.cov()(2, 2), 1.0 / 12.0, 1e-12);
  EXPECT_NEAR(ref.cov()(0, 0), 0.75, 1e-12);
  EXPECT_NEAR(ref.cov()(3, 3), 0.75, 1e-12);
  EXPECT_LT(max_abs_difference(s, ref), 1e-12);
  EXPECT_NEAR(s.mean()(2), z.real() / sqrt2, 1e-15);
  EXPECT_NEAR(s.mean()(1), z.imag() / sqrt2, 1e-15);
}

TEST(SqueezedPairState, NoCrossCorrelations) {
  for (const Complex z : {Complex(0.0), Complex(1.0, 1.0), Complex(-3.0, 0.5)}) {
    EXPECT_EQ(cross_block_of(squeezed_pair_state(0.5, z)).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(SymplecticPia, IdentityAtZero) { EXPECT_EQ(symplectic_pia(0.0).s, Mat4::Identity()); }

TEST(SymplecticPia, IsSymplectic) {
  const Mat4 s = symplectic_pia(0.5).s;
  EXPECT_LT((s * symplectic_form() * s.transpose() - symplectic_form()).cwiseAbs().maxCoeff(), 1e-12);
}

// The sign pattern (-lambda)^n of the number expansion fixes the PIA signs.
TEST(SymplecticPia, MatchesFockExpansionSigns) {
  const auto u = fock::unitary_fock(fock::PiaParams{0.5}, 30);
  const auto expm_state = fock::apply(u, fock::vacuum_fock(30));
  const auto closed_form = fock::twin_beam_fock(0.5, 30);
  EXPECT_GT(fock::fidelity(expm_state, closed_form), 1.0 - 1e-10);
  const auto g = apply_unitary(TwoModeGaussianState::vacuum(), symplectic_pia(0.5));
  EXPECT_LT(fock::max_abs_difference(fock::moments_fock(expm_state), g), 1e-10);
}

TEST(SymplecticPia, AmplifiesCoherentPairIntoTwinBeam) {
  const Complex z(1.0, 1.0);
  const double lambda = 0.5;
  const TwinBeamSpec spec{lambda, 0.5 * z, 0.5 * z};
  const double norm = std::sqrt(1.0 - lambda * lambda);
  const Complex alpha = (spec.v + lambda * spec.w) / norm;
  const Complex beta = (lambda * std::conj(spec.v) + std::conj(spec.w)) / norm;
  const auto out = apply_unitary(coherent_pair_state(alpha, beta), symplectic_pia(lambda));
  EXPECT_LT(max_abs_difference(out, twin_beam_state(spec)), 1e-12);
}

TEST(FrequencyConversion, OrthogonalAndSymplectic) {
  const Mat4 s = symplectic_frequency_conversion().s;
  EXPECT_LT((s * s.transpose() - Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE(is_symplectic(s));
  EXPECT_EQ(symplectic_frequency_conversion().d, Vec4::Zero());
}

TEST(FrequencyConversion, TwiceSwapsModes) {
  const Mat4 s = symplectic_frequency_conversion().s;
  Mat4 swap = Mat4::Zero();
  swap.block<2, 2>(0, 2) = -Eigen::Matrix2d::Identity();
  swap.block<2, 2>(2, 0) = Eigen::Matrix2d::Identity();
  EXPECT_LT((s * s - swap).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((s * s * s * s + Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(FrequencyConversion, DisentanglesTwinBeam) {
  const auto out = apply_unitary(twin_beam_state({0.5, 1.0, 1.0}), symplectic_frequency_conversion());
  EXPECT_LT(cross_block_of(out).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FrequencyConversion, SplitsCoherentStateIntoConjugatePair) {
  for (const Complex alpha : {Complex(1.0, 0.0), Complex(0.3, -1.2), Complex(-2.0, 0.5)}) {
    const auto fc = symplectic_frequency_conversion(std::numbers::pi / 4.0, splitting_phase(alpha));
    const auto out = apply_unitary(coherent_pair_state(sqrt2 * alpha, 0.0), fc);
    EXPECT_LT(max_abs_difference(out, coherent_pair_state(alpha, std::conj(alpha))), 1e-12);
  }
}

TEST(DisplaceSqueeze, Identities) {
  const auto d = symplectic_displace(0.0, 0.0);
  EXPECT_EQ(d.s, Mat4::Identity());
  EXPECT_EQ(d.d, Vec4::Zero());
  const auto prod = compose(symplectic_squeeze(Mode::a, 0.7), symplectic_squeeze(Mode::a, -0.7));
  EXPECT_LT((prod.s - Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(DisplaceSqueeze, DisplacementShiftsQuadratures) {
  const auto s = apply_unitary(TwoModeGaussianState::vacuum(), symplectic_displace(Complex(1.5, -0.5), Complex(0.0, 2.0)));
  EXPECT_EQ(s.mean(), Vec4(1.5, -0.5, 0.0, 2.0));
}

TEST(DisplaceSqueeze, SqueezedVacuumMatchesFockOracle) {
  const double r = std::atanh(0.5);
  const auto g = apply_unitary(TwoModeGaussianState::vacuum(), symplectic_squeeze(Mode::a, r));
  EXPECT_NEAR(g.cov()(0, 0), 0.75, 1e-12);
  EXPECT_NEAR(g.cov()(1, 1), 1.0 / 12.0, 1e-12);
  const auto f = fock::apply(fock::unitary_fock(fock::SqueezeParams{Mode::a, r}, 40), fock::vacuum_fock(40));
  EXPECT_LT(fock::max_abs_difference(fock::moments_fock(f), g), 1e-10);
}

TEST(ApplyUnitary, IdentityLeavesStateUnchanged) {
  const auto s = twin_beam_state({0.3, Complex(1.0, 2.0), 0.5});
  EXPECT_EQ(max_abs_difference(apply_unitary(s, GaussianUnitary::identity()), s), 0.0);
}

TEST(ApplyUnitary, PiaThenConversionGivesSqueezedPair) {
  for (double lambda : {0.0, 0.3, 0.6, 0.9}) {
    const auto out = apply_unitary(apply_unitary(TwoModeGaussianState::vacuum(), symplectic_pia(lambda)),
                                   symplectic_frequency_conversion());
    EXPECT_LT(max_abs_difference(out, squeezed_pair_state(lambda, 0.0)), 1e-12);
  }
}

TEST(ApplyUnitary, RejectsNonSymplectic) {
  GaussianUnitary u;
  u.s(0, 0) = 2.0;
  EXPECT_THROW(apply_unitary(TwoModeGaussianState::vacuum(), u), ContractError);
}

TEST(ApplyUnitary, PreservesUncertainty) {
  const std::vector<GaussianUnitary> catalog = {
      symplectic_pia(0.7), symplectic_frequency_conversion(), symplectic_frequency_conversion(0.3, 1.1),
      symplectic_squeeze(Mode::b, -0.8), symplectic_displace(Complex(1.0, 2.0), Complex(-1.0, 0.0))};
  auto s = twin_beam_state({0.4, 1.0, Complex(0.0, 1.0)});
  for (const auto& u : catalog) {
    s = apply_unitary(s, u);
    EXPECT_GE(uncertainty_margin(s.cov()), -1e-10);
  }
}

TEST(TwoModeGaussianState, RejectsUnphysicalCovariance) {
  EXPECT_THROW(TwoModeGaussianState(Vec4::Zero(), 0.1 * Mat4::Identity()), ContractError);
  Mat4 asym = 0.25 * Mat4::Identity();
  asym(0, 1) = 0.1;
  EXPECT_THROW(TwoModeGaussianState(Vec4::Zero(), asym), ContractError);
}

// Property: FC maps the symmetric twin beam onto the squeezed pair for any (lambda, z).
TEST(Properties, ConversionMapsTwinBeamToSqueezedPair) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lam(0.0, 0.95);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int rep = 0; rep < 200; ++rep) {
    const double lambda = lam(rng);
    const Complex z(u(rng), u(rng));
    const auto out = apply_unitary(twin_beam_state({lambda, 0.5 * z, 0.5 * z}), symplectic_frequency_conversion());
    EXPECT_LT(max_abs_difference(out, squeezed_pair_state(lambda, z)), 1e-12);
  }
}

TEST(Properties, CompositionsStaySymplectic) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  GaussianUnitary acc = GaussianUnitary::identity();
  for (int rep = 0; rep < 50; ++rep) {
    const int pick = rep % 4;
    GaussianUnitary next;
    if (pick == 0) next = symplectic_pia(0.5 * (u(rng) + 1.0) * 0.9);
    if (pick == 1) next = symplectic_frequency_conversion(u(rng), 3.0 * u(rng));
    if (pick == 2) next = symplectic_squeeze(rep % 8 < 4 ? Mode::a : Mode::b, 0.5 * u(rng));
    if (pick == 3) next = symplectic_displace(Complex(u(rng), u(rng)), Complex(u(rng), u(rng)));
    acc = compose(next, acc);
    EXPECT_TRUE(is_symplectic(acc.s, 1e-12));
  }
}

}  // namespace
}  // namespace twinbeam
