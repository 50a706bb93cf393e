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

// Twin-beam/heterodyne versus squeezed-pair/homodyne comparison, evaluated
// link by link: state preparation, generator conjugation, evolution and the
// final measurement statistics.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

#include "twinbeam/distributions.hpp"
#include "twinbeam/evolution.hpp"
#include "twinbeam/gaussian.hpp"
#include "twinbeam/measurement.hpp"

namespace twinbeam {

struct EquivalenceReport {
  double state = 0.0;          // FC(twin beam) vs squeezed pair
  double generator = 0.0;      // FC-conjugated moment ODE vs ODE of the conjugated generator
  double evolution = 0.0;      // FC(evolved twin beam) vs evolved squeezed pair
  double measurement = 0.0;    // heterodyne vs homodyne-pair moments and densities
  double fokker_planck = 0.0;  // closed-form drift-diffusion vs evolved heterodyne moments
  bool fokker_planck_checked = false;

  double max_deviation() const { return std::max({state, generator, evolution, measurement, fokker_planck}); }
  bool passes(double tol = 1e-9) const { return max_deviation() < tol; }
};

namespace detail {

inline double max_abs_difference(const MomentODE& lhs, const MomentODE& rhs) {
  return std::max((lhs.drift - rhs.drift).cwiseAbs().maxCoeff(),
                  (lhs.diffusion - rhs.diffusion).cwiseAbs().maxCoeff());
}

// Densities compared on a 5x5 grid spanning three standard deviations.
inline double density_difference(const ComplexGaussian& het, const Gaussian1D& px, const Gaussian1D& py) {
  const double spread = 3.0 * std::sqrt(std::max(het.cov2(0, 0), het.cov2(1, 1)));
  double worst = 0.0;
  for (int i = -2; i <= 2; ++i) {
    for (int j = -2; j <= 2; ++j) {
      const std::complex<double> z = het.mean + std::complex<double>(i, j) * (0.5 * spread);
      worst = std::max(worst, std::abs(het.pdf(z) - product_density(px, py, z)));
    }
  }
  return worst;
}

}  // namespace detail

// Generators must have symmetric baths.
inline EquivalenceReport equivalence_chain(double lambda, Complex z, const PhysicalGenerator& gen, double t) {
  detail::require_domain(t >= 0.0, "evolution time must be non-negative");
  const GaussianUnitary fc = symplectic_frequency_conversion();
  const PhysicalGenerator conj_gen = conjugate_generator(gen);
  const TwoModeGaussianState twin = twin_beam_state({lambda, 0.5 * z, 0.5 * z});
  const TwoModeGaussianState pair = squeezed_pair_state(lambda, z);

  EquivalenceReport r;
  r.state = max_abs_difference(apply_unitary(twin, fc), pair);
  r.generator = detail::max_abs_difference(conjugate(moment_ode(gen), fc), moment_ode(conj_gen));

  const TwoModeGaussianState twin_t = evolve_state(twin, gen, t);
  const TwoModeGaussianState pair_t = evolve_state(pair, conj_gen, t);
  r.evolution = max_abs_difference(apply_unitary(twin_t, fc), pair_t);

  const ComplexGaussian het = heterodyne_distribution(twin_t);
  const Gaussian1D px = homodyne_distribution(pair_t, Mode::b, Quadrature::x);
  const Gaussian1D py = homodyne_distribution(pair_t, Mode::a, Quadrature::y);
  r.measurement = std::max(max_abs_difference(het, product_to_heterodyne(px, py)),
                           detail::density_difference(het, px, py));

  if (gen.kind_k == ParametricKind::pia) {
    const ComplexGaussian fp =
        fp_evolve(heterodyne_distribution(twin), project_fokker_planck(moment_ode(gen)), t);
    r.fokker_planck = max_abs_difference(fp, het);
    r.fokker_planck_checked = true;
  }
  return r;
}

}  // namespace twinbeam
