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

// Lindblad generators for loss, linear gain and distributed parametric
// amplification of two modes, their Fokker-Planck reduction for the
// heterodyne photocurrent, and closed-form Gaussian evolution.

#pragma once

#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "twinbeam/distributions.hpp"
#include "twinbeam/errors.hpp"
#include "twinbeam/gaussian.hpp"

namespace twinbeam {

// pia: K [a^dag b^dag - a b, rho]
// psa: K/2 [a^2 - a^dag^2, rho] - K/2 [b^2 - b^dag^2, rho]
enum class ParametricKind { pia, psa };

struct PhysicalGenerator {
  double gamma = 0.0;        // damping rate
  double n_a = 0.0;          // thermal photons
  double n_b = 0.0;
  double lambda_gain = 0.0;  // active-medium gain rate
  double m_a = 0.0;          // inversion photons
  double m_b = 0.0;
  double k = 0.0;            // parametric gain rate, signed
  ParametricKind kind_k = ParametricKind::pia;

  static PhysicalGenerator loss(double gamma, double nbar = 0.0) {
    PhysicalGenerator g;
    g.gamma = gamma;
    g.n_a = g.n_b = nbar;
    return g;
  }

  static PhysicalGenerator gain(double rate, double mbar = 0.0) {
    PhysicalGenerator g;
    g.lambda_gain = rate;
    g.m_a = g.m_b = mbar;
    return g;
  }

  PhysicalGenerator with_parametric(double rate, ParametricKind kind = ParametricKind::pia) const {
    PhysicalGenerator g = *this;
    g.k = rate;
    g.kind_k = kind;
    return g;
  }

  PhysicalGenerator with_gain(double rate, double mbar = 0.0) const {
    PhysicalGenerator g = *this;
    g.lambda_gain = rate;
    g.m_a = g.m_b = mbar;
    return g;
  }

  void validate() const {
    detail::require_domain(gamma >= 0.0 && lambda_gain >= 0.0, "damping and gain rates must be non-negative");
    detail::require_domain(n_a >= 0.0 && n_b >= 0.0 && m_a >= 0.0 && m_b >= 0.0,
                           "bath photon numbers must be non-negative");
    detail::require_domain(std::isfinite(k), "parametric rate must be finite");
  }

  bool symmetric_baths() const { return n_a == n_b && m_a == m_b; }

  // Weight of L[c] collected from loss and gain.
  double lowering_weight(Mode mode) const {
    return mode == Mode::a ? gamma * (n_a + 1.0) + lambda_gain * m_a : gamma * (n_b + 1.0) + lambda_gain * m_b;
  }

  // Weight of L[c^dag].
  double raising_weight(Mode mode) const {
    return mode == Mode::a ? gamma * n_a + lambda_gain * (m_a + 1.0) : gamma * n_b + lambda_gain * (m_b + 1.0);
  }
};

// Coefficients of 2{(A+C_a)L[a^dag] + (A+C_b)L[b^dag] + (B+C_a)L[a] + (B+C_b)L[b]} + K[a^dag b^dag - ab, .]
struct CanonicalCoefficients {
  double a = 0.0;
  double b = 0.0;
  double c_a = 0.0;
  double c_b = 0.0;
  double k = 0.0;
};

struct DriftDiffusion {
  double q = 0.0;
  double d = 0.0;
};

// mean' = drift mean, cov' = drift cov + cov drift^T + diffusion
struct MomentODE {
  Mat4 drift = Mat4::Zero();
  Mat4 diffusion = Mat4::Zero();
};

// Gauge: A is the smaller of the two L[c^dag] half-weights; C_a, C_b carry the
// mode asymmetry.
inline CanonicalCoefficients canonicalize(const PhysicalGenerator& gen) {
  gen.validate();
  detail::require_contract(gen.kind_k == ParametricKind::pia,
                           "canonical form carries the phase-insensitive parametric term only");
  const double raise_a = 0.5 * gen.raising_weight(Mode::a);
  const double raise_b = 0.5 * gen.raising_weight(Mode::b);
  CanonicalCoefficients c;
  c.a = std::min(raise_a, raise_b);
  c.c_a = raise_a - c.a;
  c.c_b = raise_b - c.a;
  c.b = 0.5 * gen.lowering_weight(Mode::a) - c.c_a;
  c.k = gen.k;
  return c;
}

inline DriftDiffusion drift_diffusion(const CanonicalCoefficients& c) {
  return {c.b - c.a - c.k, c.a + c.b + c.c_a + c.c_b};
}

inline MomentODE moment_ode(const PhysicalGenerator& gen) {
  gen.validate();
  MomentODE ode;
  for (Mode mode : {Mode::a, Mode::b}) {
    const int i = quadrature_index(mode, Quadrature::x);
    const double down = gen.lowering_weight(mode);
    const double up = gen.raising_weight(mode);
    for (int j = i; j < i + 2; ++j) {
      ode.drift(j, j) = -0.5 * (down - up);
      ode.diffusion(j, j) = 0.25 * (down + up);
    }
  }
  if (gen.kind_k == ParametricKind::pia) {
    // da/dt = K b^dag, db/dt = K a^dag
    ode.drift(0, 2) += gen.k;
    ode.drift(2, 0) += gen.k;
    ode.drift(1, 3) -= gen.k;
    ode.drift(3, 1) -= gen.k;
  } else {
    // da/dt = -K a^dag, db/dt = K b^dag: Y_a and X_b amplified for K > 0
    ode.drift(0, 0) -= gen.k;
    ode.drift(1, 1) += gen.k;
    ode.drift(2, 2) += gen.k;
    ode.drift(3, 3) -= gen.k;
  }
  return ode;
}

// Moment ODE seen in the frame rho -> U rho U^dag.
inline MomentODE conjugate(const MomentODE& ode, const GaussianUnitary& u) {
  return {u.s * ode.drift * u.s.inverse(), u.s * ode.diffusion * u.s.transpose()};
}

// Drift and diffusion of the heterodyne photocurrent Z = a + b^dag implied by
// a moment ODE. Requires Re Z and Im Z to evolve autonomously.
inline DriftDiffusion project_fokker_planck(const MomentODE& ode) {
  const Vec4 re(1.0, 0.0, 1.0, 0.0);
  const Vec4 im(0.0, 1.0, 0.0, -1.0);
  const double q = -0.5 * re.dot(ode.drift * re);
  const Vec4 re_row = ode.drift.transpose() * re;
  const Vec4 im_row = ode.drift.transpose() * im;
  const double scale = std::max(1.0, ode.drift.cwiseAbs().maxCoeff());
  detail::require_contract((re_row + q * re).cwiseAbs().maxCoeff() <= 1e-12 * scale &&
                               (im_row + q * im).cwiseAbs().maxCoeff() <= 1e-12 * scale,
                           "photocurrent moments are not closed under this generator");
  return {q, re.dot(ode.diffusion * re)};
}

inline TwoModeGaussianState evolve_state(const TwoModeGaussianState& state, const MomentODE& ode, double t) {
  detail::require_domain(t >= 0.0, "evolution time must be non-negative");
  if (t == 0.0) return state;
  // exp([[-M, D], [0, M^T]] t) = [[., F12], [0, F22]] with F22 = e^{M^T t}
  // and F22^T F12 = int_0^t e^{Ms} D e^{M^T s} ds.
  Eigen::Matrix<double, 8, 8> block = Eigen::Matrix<double, 8, 8>::Zero();
  block.topLeftCorner<4, 4>() = -ode.drift * t;
  block.topRightCorner<4, 4>() = ode.diffusion * t;
  block.bottomRightCorner<4, 4>() = ode.drift.transpose() * t;
  const Eigen::Matrix<double, 8, 8> expo = block.exp();
  const Mat4 propagator = expo.bottomRightCorner<4, 4>().transpose();
  const Mat4 noise = propagator * expo.topRightCorner<4, 4>();
  const Mat4 cov = propagator * state.cov() * propagator.transpose() + 0.5 * (noise + noise.transpose());
  return {propagator * state.mean(), cov};
}

inline TwoModeGaussianState evolve_state(const TwoModeGaussianState& state, const PhysicalGenerator& gen, double t) {
  return evolve_state(state, moment_ode(gen), t);
}

// (1 - e^{-2Qt})/Q, continuous through Q = 0.
inline double relaxation_integral(double q, double t) {
  const double x = q * t;
  if (std::abs(x) < 1e-8) return 2.0 * t * (1.0 - x + (2.0 / 3.0) * x * x);
  return -std::expm1(-2.0 * x) / q;
}

// Delta^2(t) = (D/Q)(1 - e^{-2Qt}) + Delta^2(0) e^{-2Qt}
inline double fp_variance(double delta2_0, double q, double d, double t) {
  detail::require_domain(delta2_0 >= 0.0, "initial heterodyne variance must be non-negative");
  detail::require_domain(t >= 0.0, "evolution time must be non-negative");
  return d * relaxation_integral(q, t) + delta2_0 * std::exp(-2.0 * q * t);
}

// Gaussian solution of dP/dt = {Q(d_z z + d_zbar zbar) + 2D d^2_{z zbar}} P.
inline ComplexGaussian fp_evolve(const ComplexGaussian& dist, double q, double d, double t) {
  detail::require_contract(dist.is_isotropic(1e-12 * std::max(1.0, dist.delta2())),
                           "Fokker-Planck evolution requires an isotropic distribution");
  return ComplexGaussian::isotropic(dist.mean * std::exp(-q * t), fp_variance(dist.delta2(), q, d, t));
}

inline ComplexGaussian fp_evolve(const ComplexGaussian& dist, const DriftDiffusion& dd, double t) {
  return fp_evolve(dist, dd.q, dd.d, t);
}

// Generator in the frame of the 50-50 frequency conversion. Loss and gain are
// invariant for symmetric baths; a pia term becomes a psa term with the same
// rate. Converting a psa term again lands on a pia term with rate -K, because
// two conversions swap the modes up to a sign (a -> -b, b -> a).
inline PhysicalGenerator conjugate_generator(const PhysicalGenerator& gen) {
  gen.validate();
  if (!gen.symmetric_baths()) {
    std::ostringstream msg;
    msg << "frequency conversion of asymmetric baths (n_a=" << gen.n_a << ", n_b=" << gen.n_b
        << ", m_a=" << gen.m_a << ", m_b=" << gen.m_b << ") produces cross-terms";
    throw UnsupportedError(msg.str());
  }
  PhysicalGenerator out = gen;
  if (gen.kind_k == ParametricKind::pia) {
    out.kind_k = ParametricKind::psa;
  } else {
    out.kind_k = ParametricKind::pia;
    out.k = -gen.k;
  }
  return out;
}

}  // namespace twinbeam
