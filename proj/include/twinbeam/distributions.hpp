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

// Outcome distributions of heterodyne (complex) and homodyne (real) detection.

#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

#include "twinbeam/errors.hpp"

namespace twinbeam {

// Gaussian over the complex plane; cov2 is the covariance of (Re z, Im z).
// An isotropic distribution has cov2 = (delta2/2) I and density
// exp(-|z - mean|^2/delta2)/(pi delta2).
struct ComplexGaussian {
  std::complex<double> mean{};
  Eigen::Matrix2d cov2 = 0.5 * Eigen::Matrix2d::Identity();

  static ComplexGaussian isotropic(std::complex<double> mean, double delta2) {
    detail::require_domain(delta2 >= 0.0, "heterodyne variance must be non-negative");
    return {mean, 0.5 * delta2 * Eigen::Matrix2d::Identity()};
  }

  // Total variance Var Re + Var Im; equals delta2 when isotropic.
  double delta2() const { return cov2.trace(); }

  bool is_isotropic(double tol = 1e-12) const {
    return std::abs(cov2(0, 0) - cov2(1, 1)) <= tol && std::abs(cov2(0, 1)) <= tol;
  }

  bool is_valid() const {
    if (!cov2.allFinite() || std::abs(cov2(0, 1) - cov2(1, 0)) > 1e-12) return false;
    return cov2(0, 0) >= 0.0 && cov2(1, 1) >= 0.0 && cov2.determinant() >= -1e-15;
  }

  double pdf(std::complex<double> z) const {
    const Eigen::Vector2d d(z.real() - mean.real(), z.imag() - mean.imag());
    const double det = cov2.determinant();
    return std::exp(-0.5 * d.dot(cov2.inverse() * d)) / (2.0 * std::numbers::pi * std::sqrt(det));
  }
};

struct Gaussian1D {
  double mean = 0.0;
  double var = 0.25;

  double pdf(double x) const {
    return std::exp(-0.5 * (x - mean) * (x - mean) / var) / std::sqrt(2.0 * std::numbers::pi * var);
  }
};

inline double max_abs_difference(const ComplexGaussian& lhs, const ComplexGaussian& rhs) {
  return std::max(std::abs(lhs.mean - rhs.mean), (lhs.cov2 - rhs.cov2).cwiseAbs().maxCoeff());
}

}  // namespace twinbeam
