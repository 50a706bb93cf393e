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

// Two-mode Gaussian states and Gaussian unitaries at the level of first and
// second quadrature moments.
//
// Conventions: X = (c + c^dag)/2, Y = (c - c^dag)/(2i), so [X, Y] = i/2 and
// the vacuum has variance 1/4 per quadrature. Quadrature vectors are ordered
// (X_a, Y_a, X_b, Y_b). A state transformed as rho -> U rho U^dag has its
// moments mapped by mean -> S mean + d, cov -> S cov S^T.

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "twinbeam/errors.hpp"

namespace twinbeam {

using Complex = std::complex<double>;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

enum class Mode { a, b };

// Homodyne phase: x is phi = 0, y is phi = pi/2.
enum class Quadrature { x, y };

inline constexpr double kVacuumVariance = 0.25;

inline int quadrature_index(Mode mode, Quadrature q) {
  return (mode == Mode::a ? 0 : 2) + (q == Quadrature::x ? 0 : 1);
}

// Block-diagonal symplectic form with blocks [[0,1],[-1,0]].
inline Mat4 symplectic_form() {
  Mat4 omega = Mat4::Zero();
  omega(0, 1) = 1.0;
  omega(1, 0) = -1.0;
  omega(2, 3) = 1.0;
  omega(3, 2) = -1.0;
  return omega;
}

inline bool is_symplectic(const Mat4& s, double tol = 1e-12) {
  const Mat4 omega = symplectic_form();
  const double scale = std::max(1.0, s.squaredNorm());
  return (s * omega * s.transpose() - omega).cwiseAbs().maxCoeff() <= tol * scale;
}

// Smallest eigenvalue of cov + (i/4) Omega. Non-negative for physical states.
inline double uncertainty_margin(const Mat4& cov) {
  Eigen::Matrix4cd h = cov.cast<Complex>() + Complex(0.0, 0.25) * symplectic_form().cast<Complex>();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

class TwoModeGaussianState {
 public:
  TwoModeGaussianState(const Vec4& mean, const Mat4& cov) : mean_(mean), cov_(0.5 * (cov + cov.transpose())) {
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    detail::require_contract((cov - cov.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale,
                             "covariance matrix is not symmetric");
    detail::require_contract(uncertainty_margin(cov_) >= -1e-10 * scale,
                             "covariance matrix violates the uncertainty relation");
  }

  static TwoModeGaussianState vacuum() { return {Vec4::Zero(), kVacuumVariance * Mat4::Identity()}; }

  const Vec4& mean() const { return mean_; }
  const Mat4& cov() const { return cov_; }

  // <c> = <X_c> + i <Y_c>
  Complex amplitude(Mode mode) const {
    const int i = quadrature_index(mode, Quadrature::x);
    return {mean_(i), mean_(i + 1)};
  }

  // <c^dag c> = Var X + Var Y - 1/2 + |<c>|^2
  double photons(Mode mode) const {
    const int i = quadrature_index(mode, Quadrature::x);
    return cov_(i, i) + cov_(i + 1, i + 1) - 0.5 + mean_(i) * mean_(i) + mean_(i + 1) * mean_(i + 1);
  }

  // N = <a^dag a + b^dag b>/2
  double photons_per_mode() const { return 0.5 * (photons(Mode::a) + photons(Mode::b)); }

  // Block of cov coupling mode a to mode b.
  Eigen::Matrix2d cross_block() const { return cov_.block<2, 2>(0, 2); }

 private:
  Vec4 mean_;
  Mat4 cov_;
};

struct GaussianUnitary {
  Mat4 s = Mat4::Identity();
  Vec4 d = Vec4::Zero();

  static GaussianUnitary identity() { return {}; }
};

// `after` applied following `before`.
inline GaussianUnitary compose(const GaussianUnitary& after, const GaussianUnitary& before) {
  return {after.s * before.s, after.s * before.d + after.d};
}

inline GaussianUnitary inverse(const GaussianUnitary& u) {
  const Mat4 s_inv = u.s.inverse();
  return {s_inv, -s_inv * u.d};
}

struct TwinBeamSpec {
  double lambda = 0.0;
  Complex v{};
  Complex w{};

  Complex z() const { return v + w; }
  double gain() const { return 1.0 / (1.0 - lambda * lambda); }
  double xi() const { return std::atanh(lambda); }
};

namespace detail {

inline void require_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) {
    std::ostringstream msg;
    msg << "lambda must lie in [0, 1), got " << lambda;
    throw DomainError(msg.str());
  }
}

inline Eigen::Matrix2d rotation(double phi) {
  Eigen::Matrix2d r;
  r << std::cos(phi), -std::sin(phi), std::sin(phi), std::cos(phi);
  return r;
}

}  // namespace detail

// Heterodyne variance (1 - lambda)/(1 + lambda) of the twin-beam family.
inline double twin_beam_variance(double lambda) {
  detail::require_lambda(lambda);
  return (1.0 - lambda) / (1.0 + lambda);
}

// Photons per mode stored in the two-mode squeezing, lambda^2/(1 - lambda^2).
inline double squeezing_photons(double lambda) {
  detail::require_lambda(lambda);
  return lambda * lambda / (1.0 - lambda * lambda);
}

inline GaussianUnitary symplectic_displace(Complex v, Complex w) {
  GaussianUnitary u;
  u.d << v.real(), v.imag(), w.real(), w.imag();
  return u;
}

// S_c(r) = exp[r/2 (c^dag^2 - c^2)]: X_c scaled by e^r, Y_c by e^-r.
inline GaussianUnitary symplectic_squeeze(Mode mode, double r) {
  GaussianUnitary u;
  const int i = quadrature_index(mode, Quadrature::x);
  u.s(i, i) = std::exp(r);
  u.s(i + 1, i + 1) = std::exp(-r);
  return u;
}

// exp[xi (ab - a^dag b^dag)] with xi = atanh(lambda):
// a -> a cosh xi - b^dag sinh xi, b -> b cosh xi - a^dag sinh xi.
inline GaussianUnitary symplectic_pia(double lambda) {
  detail::require_lambda(lambda);
  const double xi = std::atanh(lambda);
  const double c = std::cosh(xi);
  const double s = std::sinh(xi);
  GaussianUnitary u;
  u.s << c, 0, -s, 0,
         0, c, 0, s,
         -s, 0, c, 0,
         0, s, 0, c;
  return u;
}

// exp[theta (e^{i phi} a^dag b - e^{-i phi} a b^dag)]:
// a -> cos(theta) a + e^{i phi} sin(theta) b, b -> cos(theta) b - e^{-i phi} sin(theta) a.
inline GaussianUnitary symplectic_frequency_conversion(double theta, double phi) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  GaussianUnitary u;
  u.s.block<2, 2>(0, 0) = c * Eigen::Matrix2d::Identity();
  u.s.block<2, 2>(0, 2) = s * detail::rotation(phi);
  u.s.block<2, 2>(2, 0) = -s * detail::rotation(-phi);
  u.s.block<2, 2>(2, 2) = c * Eigen::Matrix2d::Identity();
  return u;
}

// 50-50 conversion exp[pi/4 (a b^dag - a^dag b)]: (a, b) -> ((a - b)/sqrt2, (a + b)/sqrt2).
inline GaussianUnitary symplectic_frequency_conversion() {
  return symplectic_frequency_conversion(std::numbers::pi / 4.0, std::numbers::pi);
}

// Pump phase for which the 50-50 conversion maps |sqrt2 alpha> x |0> onto
// |alpha> x |conj(alpha)>.
inline double splitting_phase(Complex alpha) { return 2.0 * std::arg(alpha) + std::numbers::pi; }

inline TwoModeGaussianState apply_unitary(const TwoModeGaussianState& state, const GaussianUnitary& u) {
  detail::require_contract(is_symplectic(u.s), "Gaussian unitary has a non-symplectic matrix");
  return {u.s * state.mean() + u.d, u.s * state.cov() * u.s.transpose()};
}

inline TwoModeGaussianState coherent_pair_state(Complex alpha, Complex beta) {
  return apply_unitary(TwoModeGaussianState::vacuum(), symplectic_displace(alpha, beta));
}

// D_a(v) D_b(conj w) exp[atanh(lambda)(ab - a^dag b^dag)] |0,0>
inline TwoModeGaussianState twin_beam_state(const TwinBeamSpec& spec) {
  detail::require_lambda(spec.lambda);
  const auto pia = symplectic_pia(spec.lambda);
  const auto disp = symplectic_displace(spec.v, std::conj(spec.w));
  return apply_unitary(TwoModeGaussianState::vacuum(), compose(disp, pia));
}

// The same state prepared by amplifying the coherent pair
// |(v + lambda w)/sqrt(1-lambda^2)> x |(lambda conj v + conj w)/sqrt(1-lambda^2)>.
inline TwoModeGaussianState amplified_coherent_pair_state(const TwinBeamSpec& spec) {
  detail::require_lambda(spec.lambda);
  const double norm = std::sqrt(1.0 - spec.lambda * spec.lambda);
  const Complex alpha = (spec.v + spec.lambda * spec.w) / norm;
  const Complex beta = (spec.lambda * std::conj(spec.v) + std::conj(spec.w)) / norm;
  return apply_unitary(coherent_pair_state(alpha, beta), symplectic_pia(spec.lambda));
}

// [D_a(i Im z/sqrt2) S_a(r)] |0> x [D_b(Re z/sqrt2) S_b(-r)] |0>, r = atanh(lambda).
inline TwoModeGaussianState squeezed_pair_state(double lambda, Complex z) {
  detail::require_lambda(lambda);
  const double r = std::atanh(lambda);
  const auto squeeze = compose(symplectic_squeeze(Mode::a, r), symplectic_squeeze(Mode::b, -r));
  const auto disp = symplectic_displace(Complex(0.0, z.imag() / std::numbers::sqrt2),
                                        Complex(z.real() / std::numbers::sqrt2, 0.0));
  return apply_unitary(TwoModeGaussianState::vacuum(), compose(disp, squeeze));
}

inline double max_abs_difference(const TwoModeGaussianState& lhs, const TwoModeGaussianState& rhs) {
  return std::max((lhs.mean() - rhs.mean()).cwiseAbs().maxCoeff(), (lhs.cov() - rhs.cov()).cwiseAbs().maxCoeff());
}

}  // namespace twinbeam
