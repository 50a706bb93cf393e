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

// Brute-force number-basis oracle for two modes truncated at n_max photons
// each: pure states and density matrices, matrix-exponential unitaries,
// heterodyne probabilities from the photocurrent eigenvectors, and fixed-step
// RK4 integration of the full master equation.
//
// Basis index of |i, j> (i photons in a, j in b) is i*(n_max + 1) + j.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>

#include "twinbeam/errors.hpp"
#include "twinbeam/evolution.hpp"
#include "twinbeam/gaussian.hpp"

namespace twinbeam::fock {

using CMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CVector = Eigen::VectorXcd;
using SparseOp = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

inline constexpr int kDefaultNMax = 40;
inline constexpr double kTailBound = 1e-10;

// Truncated ladder operators for one n_max.
class FockSpace {
 public:
  explicit FockSpace(int n_max) : n_max_(n_max), levels_(n_max + 1), dim_(levels_ * levels_) {
    detail::require_domain(n_max >= 1, "n_max must be at least 1");
    std::vector<Eigen::Triplet<Complex>> ta;
    std::vector<Eigen::Triplet<Complex>> tb;
    for (int i = 0; i < levels_; ++i) {
      for (int j = 0; j < levels_; ++j) {
        if (i + 1 < levels_) ta.emplace_back(index(i, j), index(i + 1, j), std::sqrt(double(i + 1)));
        if (j + 1 < levels_) tb.emplace_back(index(i, j), index(i, j + 1), std::sqrt(double(j + 1)));
      }
    }
    a_.resize(dim_, dim_);
    b_.resize(dim_, dim_);
    a_.setFromTriplets(ta.begin(), ta.end());
    b_.setFromTriplets(tb.begin(), tb.end());
    SparseOp eye(dim_, dim_);
    eye.setIdentity();
    identity_ = eye;
  }

  int n_max() const { return n_max_; }
  int levels() const { return levels_; }
  int dim() const { return dim_; }
  int index(int i, int j) const { return i * levels_ + j; }

  const SparseOp& lowering(Mode mode) const { return mode == Mode::a ? a_ : b_; }
  SparseOp raising(Mode mode) const { return SparseOp(lowering(mode).adjoint()); }
  const SparseOp& identity() const { return identity_; }

 private:
  int n_max_;
  int levels_;
  int dim_;
  SparseOp a_;
  SparseOp b_;
  SparseOp identity_;
};

// Shared, read-only after construction.
inline const FockSpace& fock_space(int n_max) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<const FockSpace>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n_max];
  if (!slot) slot = std::make_unique<const FockSpace>(n_max);
  return *slot;
}

class FockState {
 public:
  static FockState pure(int n_max, CVector amplitudes, double norm_deficit = -1.0) {
    FockState s(n_max);
    detail::require_contract(amplitudes.size() == s.dim(), "amplitude vector has the wrong dimension");
    s.psi_ = std::move(amplitudes);
    s.pure_ = true;
    s.norm_deficit_ = norm_deficit >= 0.0 ? norm_deficit : std::max(0.0, 1.0 - s.trace());
    return s;
  }

  static FockState mixed(int n_max, CMatrix rho, double norm_deficit = -1.0) {
    FockState s(n_max);
    detail::require_contract(rho.rows() == s.dim() && rho.cols() == s.dim(), "density matrix has the wrong dimension");
    s.rho_ = std::move(rho);
    s.pure_ = false;
    s.norm_deficit_ = norm_deficit >= 0.0 ? norm_deficit : std::max(0.0, 1.0 - s.trace());
    return s;
  }

  int n_max() const { return n_max_; }
  int levels() const { return n_max_ + 1; }
  int dim() const { return levels() * levels(); }
  bool is_pure() const { return pure_; }

  const CVector& amplitudes() const {
    detail::require_contract(pure_, "mixed state has no amplitude vector");
    return psi_;
  }

  CMatrix density() const {
    if (pure_) return psi_ * psi_.adjoint();
    return rho_;
  }

  const CMatrix& density_ref() const {
    detail::require_contract(!pure_, "pure state stores no density matrix");
    return rho_;
  }

  double trace() const { return pure_ ? psi_.squaredNorm() : rho_.trace().real(); }

  // Probability weight cut off by the truncation.
  double norm_deficit() const { return norm_deficit_; }

  // Population of the outermost shell (either mode holding n_max photons).
  double tail_weight() const {
    double w = 0.0;
    for (int i = 0; i < levels(); ++i) {
      for (int j = 0; j < levels(); ++j) {
        if (i != n_max_ && j != n_max_) continue;
        const int r = i * levels() + j;
        w += pure_ ? std::norm(psi_(r)) : rho_(r, r).real();
      }
    }
    return w;
  }

  Complex expectation(const SparseOp& op) const {
    if (pure_) return psi_.dot(op * psi_);
    Complex sum = 0.0;
    for (int r = 0; r < op.outerSize(); ++r) {
      for (SparseOp::InnerIterator it(op, r); it; ++it) sum += it.value() * rho_(it.col(), r);
    }
    return sum;
  }

  double hermiticity_defect() const { return pure_ ? 0.0 : (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff(); }

  double min_eigenvalue() const {
    if (pure_) return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(Eigen::MatrixXcd(rho_), Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
  }

 private:
  explicit FockState(int n_max) : n_max_(n_max) { detail::require_domain(n_max >= 1, "n_max must be at least 1"); }

  int n_max_;
  bool pure_ = true;
  CVector psi_;
  CMatrix rho_;
  double norm_deficit_ = 0.0;
};

namespace detail {

inline double log_factorial(int n) { return std::lgamma(double(n) + 1.0); }

// Sum of Poisson(mean) probabilities above n_max, summed term by term so tiny
// tails keep their relative precision.
inline double poisson_tail(double mean, int n_max) {
  if (mean == 0.0) return 0.0;
  double tail = 0.0;
  for (int n = n_max + 1; n < n_max + 2000; ++n) {
    const double term = std::exp(-mean + n * std::log(mean) - log_factorial(n));
    tail += term;
    if (n > mean && term < 1e-30 * std::max(tail, 1e-300)) break;
  }
  return tail;
}

inline double squeezed_vacuum_tail(double r, int n_max) {
  const double t = std::tanh(std::abs(r));
  if (t == 0.0) return 0.0;
  double tail = 0.0;
  for (int k = 0; k < 5000; ++k) {
    if (2 * k <= n_max) continue;
    const double log_p = -std::log(std::cosh(r)) + 2.0 * k * std::log(t) + log_factorial(2 * k) -
                         2.0 * k * std::numbers::ln2 - 2.0 * log_factorial(k);
    const double term = std::exp(log_p);
    tail += term;
    if (term < 1e-30 * std::max(tail, 1e-300) && k > 10) break;
  }
  return tail;
}

inline void require_tail(double tail, double bound, const char* what) {
  if (tail > bound) {
    std::ostringstream msg;
    msg << what << ": truncation tail " << tail << " exceeds bound " << bound;
    throw TruncationError(msg.str());
  }
}

// exp(generator) computed block by block over the connected components of
// the generator's sparsity graph.
inline SparseOp expm_by_blocks(const SparseOp& generator) {
  const int n = static_cast<int>(generator.rows());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int r = 0; r < generator.outerSize(); ++r) {
    for (SparseOp::InnerIterator it(generator, r); it; ++it) {
      if (it.value() != Complex(0.0)) parent[find(r)] = find(static_cast<int>(it.col()));
    }
  }
  std::map<int, std::vector<int>> blocks;
  for (int i = 0; i < n; ++i) blocks[find(i)].push_back(i);

  std::vector<Eigen::Triplet<Complex>> triplets;
  std::vector<int> local(n, -1);
  for (const auto& [root, members] : blocks) {
    const int m = static_cast<int>(members.size());
    if (m == 1 && generator.coeff(members[0], members[0]) == Complex(0.0)) {
      triplets.emplace_back(members[0], members[0], 1.0);
      continue;
    }
    for (int i = 0; i < m; ++i) local[members[i]] = i;
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      for (SparseOp::InnerIterator it(generator, members[i]); it; ++it) g(i, local[it.col()]) = it.value();
    }
    const Eigen::MatrixXcd e = g.exp();
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        if (e(i, j) != Complex(0.0)) triplets.emplace_back(members[i], members[j], e(i, j));
      }
    }
  }
  SparseOp out(n, n);
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

}  // namespace detail

inline FockState vacuum_fock(int n_max) {
  const auto& space = fock_space(n_max);
  CVector psi = CVector::Zero(space.dim());
  psi(0) = 1.0;
  return FockState::pure(n_max, std::move(psi), 0.0);
}

// sqrt(1 - lambda^2) sum_n (-lambda)^n |n, n>
inline FockState twin_beam_fock(double lambda, int n_max) {
  twinbeam::detail::require_lambda(lambda);
  const auto& space = fock_space(n_max);
  CVector psi = CVector::Zero(space.dim());
  const double norm = std::sqrt(1.0 - lambda * lambda);
  double amp = norm;
  for (int n = 0; n <= n_max; ++n) {
    psi(space.index(n, n)) = amp;
    amp *= -lambda;
  }
  return FockState::pure(n_max, std::move(psi), std::pow(lambda, 2.0 * (n_max + 1)));
}

// |alpha> x |beta>
inline FockState coherent_fock(Complex alpha, Complex beta, int n_max) {
  const auto& space = fock_space(n_max);
  std::vector<Complex> ca(space.levels());
  std::vector<Complex> cb(space.levels());
  const auto fill = [&](Complex amp, std::vector<Complex>& c) {
    const double w = std::exp(-0.5 * std::norm(amp));
    Complex term = w;
    for (int n = 0; n <= n_max; ++n) {
      c[n] = term;
      term *= amp / std::sqrt(double(n + 1));
    }
  };
  fill(alpha, ca);
  fill(beta, cb);
  CVector psi(space.dim());
  for (int i = 0; i <= n_max; ++i) {
    for (int j = 0; j <= n_max; ++j) psi(space.index(i, j)) = ca[i] * cb[j];
  }
  const double keep_a = 1.0 - detail::poisson_tail(std::norm(alpha), n_max);
  const double keep_b = 1.0 - detail::poisson_tail(std::norm(beta), n_max);
  const double deficit = detail::poisson_tail(std::norm(alpha), n_max) + detail::poisson_tail(std::norm(beta), n_max) -
                         (1.0 - keep_a) * (1.0 - keep_b);
  return FockState::pure(n_max, std::move(psi), deficit);
}

struct PiaParams {
  double lambda = 0.0;
};

// exp[theta (e^{i phi} a^dag b - e^{-i phi} a b^dag)]; defaults give the
// 50-50 conversion exp[pi/4 (a b^dag - a^dag b)].
struct ConversionParams {
  double theta = std::numbers::pi / 4.0;
  double phi = std::numbers::pi;
};

struct DisplaceParams {
  Complex v{};
  Complex w{};
};

struct SqueezeParams {
  Mode mode = Mode::a;
  double r = 0.0;
};

using UnitaryParams = std::variant<PiaParams, ConversionParams, DisplaceParams, SqueezeParams>;

// Matrix exponential of the generator on the truncated space. Parameters whose
// action on the vacuum would leave more than `tail_bound` outside the
// truncation are rejected.
inline SparseOp unitary_fock(const UnitaryParams& params, int n_max, double tail_bound = kTailBound) {
  const auto& space = fock_space(n_max);
  const SparseOp& a = space.lowering(Mode::a);
  const SparseOp& b = space.lowering(Mode::b);
  const SparseOp ad = space.raising(Mode::a);
  const SparseOp bd = space.raising(Mode::b);

  if (const auto* p = std::get_if<PiaParams>(&params)) {
    twinbeam::detail::require_lambda(p->lambda);
    detail::require_tail(std::pow(p->lambda, 2.0 * (n_max + 1)), tail_bound, "parametric amplifier");
    const SparseOp g = std::atanh(p->lambda) * (SparseOp(a * b) - SparseOp(ad * bd));
    return detail::expm_by_blocks(g);
  }
  if (const auto* p = std::get_if<ConversionParams>(&params)) {
    const Complex ph = std::polar(1.0, p->phi);
    const SparseOp g = p->theta * (ph * SparseOp(ad * b) - std::conj(ph) * SparseOp(a * bd));
    return detail::expm_by_blocks(g);
  }
  if (const auto* p = std::get_if<DisplaceParams>(&params)) {
    detail::require_tail(detail::poisson_tail(std::norm(p->v), n_max), tail_bound, "displacement of mode a");
    detail::require_tail(detail::poisson_tail(std::norm(p->w), n_max), tail_bound, "displacement of mode b");
    const SparseOp ua = detail::expm_by_blocks(SparseOp(p->v * ad - std::conj(p->v) * a));
    const SparseOp ub = detail::expm_by_blocks(SparseOp(p->w * bd - std::conj(p->w) * b));
    return SparseOp(ua * ub);
  }
  const auto& p = std::get<SqueezeParams>(params);
  detail::require_tail(detail::squeezed_vacuum_tail(p.r, n_max), tail_bound, "squeezer");
  const SparseOp& c = space.lowering(p.mode);
  const SparseOp cd = space.raising(p.mode);
  const SparseOp g = 0.5 * p.r * (SparseOp(cd * cd) - SparseOp(c * c));
  return detail::expm_by_blocks(g);
}

inline FockState apply(const SparseOp& u, const FockState& state) {
  if (state.is_pure()) return FockState::pure(state.n_max(), u * state.amplitudes(), state.norm_deficit());
  const CMatrix left = u * state.density_ref();
  const CMatrix out = (u.conjugate() * left.transpose()).transpose();
  return FockState::mixed(state.n_max(), out, state.norm_deficit());
}

inline double fidelity(const FockState& lhs, const FockState& rhs) {
  return std::norm(lhs.amplitudes().dot(rhs.amplitudes()));
}

// Von Neumann entropy of mode a for a pure two-mode state.
inline double entanglement_entropy(const FockState& state) {
  const int levels = state.levels();
  Eigen::MatrixXcd psi(levels, levels);
  for (int i = 0; i < levels; ++i) {
    for (int j = 0; j < levels; ++j) psi(i, j) = state.amplitudes()(i * levels + j);
  }
  const Eigen::VectorXd sv = psi.jacobiSvd().singularValues();
  double s = 0.0;
  for (int i = 0; i < sv.size(); ++i) {
    const double p = sv(i) * sv(i);
    if (p > 1e-300) s -= p * std::log(p);
  }
  return s;
}

// Components <p, q | z>> of the photocurrent eigenvector
// e^{|z|^2/2}/sqrt(pi) exp(-a^dag b^dag)|z> x |conj z>:
//   p >= q: e^{-|z|^2/2}/sqrt(pi) (-1)^q sqrt(q!/p!) z^{p-q} L_q^{(p-q)}(|z|^2)
//   p <  q: the same with (p, q) swapped and z -> conj z.
inline CVector photocurrent_eigenvector(Complex z, int n_max) {
  const auto& space = fock_space(n_max);
  const double x = std::norm(z);
  const double mod = std::abs(z);
  const double arg = std::arg(z);
  CVector c = CVector::Zero(space.dim());
  std::vector<double> lag(n_max + 1);
  for (int d = 0; d <= n_max; ++d) {
    if (d > 0 && mod == 0.0) break;
    lag[0] = 1.0;
    if (n_max - d >= 1) lag[1] = 1.0 + d - x;
    for (int q = 1; q + 1 <= n_max - d; ++q) {
      lag[q + 1] = ((2.0 * q + 1.0 + d - x) * lag[q] - (q + d) * lag[q - 1]) / (q + 1.0);
    }
    for (int q = 0; q + d <= n_max; ++q) {
      const double log_pref = -0.5 * x + (d > 0 ? d * std::log(mod) : 0.0) +
                              0.5 * (detail::log_factorial(q) - detail::log_factorial(q + d)) -
                              0.5 * std::log(std::numbers::pi);
      const double mag = (q % 2 == 0 ? 1.0 : -1.0) * std::exp(log_pref) * lag[q];
      c(space.index(q + d, q)) = std::polar(mag, d * arg);
      if (d > 0) c(space.index(q, q + d)) = std::polar(mag, -d * arg);
    }
  }
  return c;
}

struct HeterodyneSample {
  double density = 0.0;
  double tail_weight = 0.0;
  bool truncation_warning = false;
};

// P(z) = <<z| rho |z>>
inline HeterodyneSample heterodyne_pdf_fock(const FockState& state, Complex z, double tail_bound = kTailBound) {
  const CVector c = photocurrent_eigenvector(z, state.n_max());
  HeterodyneSample out;
  if (state.is_pure()) {
    out.density = std::norm(c.dot(state.amplitudes()));
  } else {
    out.density = c.dot(state.density_ref() * c).real();
  }
  out.tail_weight = state.tail_weight();
  out.truncation_warning = out.tail_weight > tail_bound;
  return out;
}

// Quadrature moments in the same convention as TwoModeGaussianState.
struct QuadratureMoments {
  Vec4 mean = Vec4::Zero();
  Mat4 cov = Mat4::Zero();
};

inline QuadratureMoments moments_fock(const FockState& state) {
  const auto& space = fock_space(state.n_max());
  const SparseOp* ops[2] = {&space.lowering(Mode::a), &space.lowering(Mode::b)};
  Complex first[2];
  Complex pair[2][2];    // <c_i c_j>
  Complex number[2][2];  // <c_i^dag c_j>
  for (int i = 0; i < 2; ++i) {
    first[i] = state.expectation(*ops[i]);
    for (int j = 0; j < 2; ++j) {
      pair[i][j] = state.expectation(SparseOp(*ops[i] * *ops[j]));
      number[i][j] = state.expectation(SparseOp(SparseOp(ops[i]->adjoint()) * *ops[j]));
    }
  }
  const double tr = state.trace();
  // R_n = alpha_n c + conj(alpha_n) c^dag with alpha = 1/2 (X) or -i/2 (Y).
  const Complex alpha[2] = {Complex(0.5, 0.0), Complex(0.0, -0.5)};
  QuadratureMoments m;
  for (int n = 0; n < 4; ++n) {
    const int ci = n / 2;
    const Complex an = alpha[n % 2];
    m.mean(n) = (2.0 * (an * first[ci])).real() / tr;
  }
  for (int n = 0; n < 4; ++n) {
    for (int p = 0; p < 4; ++p) {
      const int i = n / 2;
      const int j = p / 2;
      const Complex ai = alpha[n % 2];
      const Complex aj = alpha[p % 2];
      const double delta = i == j ? 0.5 * tr : 0.0;
      // symmetrized <R_n R_p>
      const Complex sym = ai * aj * pair[i][j] + std::conj(ai * aj) * std::conj(pair[j][i]) +
                          ai * std::conj(aj) * (number[j][i] + delta) + std::conj(ai) * aj * (number[i][j] + delta);
      m.cov(n, p) = sym.real() / tr - m.mean(n) * m.mean(p);
    }
  }
  return m;
}

inline double max_abs_difference(const QuadratureMoments& lhs, const QuadratureMoments& rhs) {
  return std::max((lhs.mean - rhs.mean).cwiseAbs().maxCoeff(), (lhs.cov - rhs.cov).cwiseAbs().maxCoeff());
}

inline double max_abs_difference(const QuadratureMoments& lhs, const TwoModeGaussianState& rhs) {
  return std::max((lhs.mean - rhs.mean()).cwiseAbs().maxCoeff(), (lhs.cov - rhs.cov()).cwiseAbs().maxCoeff());
}

struct LindbladOptions {
  int steps = 0;         // 0: choose from the stability bound
  bool verify = true;    // repeat at half the step and compare moments
  double step_tolerance = 1e-6;
};

namespace detail {

// Matrix-free Liouvillian acting on rho(|i,j>, <k,l|) stored in blocks keyed
// by (d1, d2) = (i - k, j - l). Every generator term moves the key by a fixed
// step, so only keys reachable from the initial support hold storage; the
// others alias a shared zero block. A block covers the (i, j) range whose
// (k, l) lies inside the truncation, plus two rows and columns of zero
// padding on every side.
class LiouvillianStencil {
 public:
  static constexpr int kPad = 2;

  LiouvillianStencil(const PhysicalGenerator& gen, int n_max)
      : n_(n_max), levels_(n_max + 1), p_(n_max + 1 + 2 * kPad), keys_(2 * n_max + 1 + 2 * kPad), gen_(gen) {
    s_.resize(levels_ + 3);
    for (int x = 0; x < levels_ + 3; ++x) s_[x] = std::sqrt(double(x));
    e_.resize(levels_);
    for (int x = 0; x < levels_; ++x) e_[x] = x < n_ ? x + 1.0 : 0.0;
    down_a_ = gen.lowering_weight(Mode::a);
    up_a_ = gen.raising_weight(Mode::a);
    down_b_ = gen.lowering_weight(Mode::b);
    up_b_ = gen.raising_weight(Mode::b);
  }

  // Gershgorin-style bound on the Liouvillian's spectral radius.
  double spectral_bound() const {
    const double m = levels_ + 1.0;
    double r = 2.0 * (down_a_ + up_a_ + down_b_ + up_b_) * m;
    r += 4.0 * std::abs(gen_.k) * (m + 1.0);
    return r;
  }

  // Rate scale of the low-photon dynamics.
  double rate_scale() const { return 0.5 * (down_a_ + up_a_ + down_b_ + up_b_) + 2.0 * std::abs(gen_.k); }

  // Fixes the reachable keys from the support of `rho` and returns its
  // blocked form.
  std::vector<Complex> load(const CMatrix& rho) {
    const int width = 2 * n_ + 1;
    std::vector<char> reach(std::size_t(width) * width, 0);
    std::vector<std::pair<int, int>> queue;
    const auto mark = [&](int d1, int d2) {
      if (std::abs(d1) > n_ || std::abs(d2) > n_) return;
      char& r = reach[std::size_t(d1 + n_) * width + (d2 + n_)];
      if (r) return;
      r = 1;
      queue.emplace_back(d1, d2);
    };
    for (int r = 0; r < rho.rows(); ++r)
      for (int c = 0; c < rho.cols(); ++c)
        if (rho(r, c) != Complex(0.0)) mark(r / levels_ - c / levels_, r % levels_ - c % levels_);
    for (std::size_t q = 0; q < queue.size() && gen_.k != 0.0; ++q) {
      const auto [d1, d2] = queue[q];
      if (gen_.kind_k == ParametricKind::pia) {
        mark(d1 + 1, d2 + 1);
        mark(d1 - 1, d2 - 1);
      } else {
        mark(d1 + 2, d2);
        mark(d1 - 2, d2);
        mark(d1, d2 + 2);
        mark(d1, d2 - 2);
      }
    }
    active_.clear();
    const Block zero{0, p_, -kPad, -kPad};
    blocks_.assign(std::size_t(keys_) * keys_, zero);
    std::size_t used = std::size_t(p_) * p_;
    for (int d1 = -n_; d1 <= n_; ++d1)
      for (int d2 = -n_; d2 <= n_; ++d2)
        if (reach[std::size_t(d1 + n_) * width + (d2 + n_)]) {
          active_.emplace_back(d1, d2);
          const int rows = row_hi(d1) - row_lo(d1) + 1 + 2 * kPad;
          const int cols = row_hi(d2) - row_lo(d2) + 1 + 2 * kPad;
          blocks_[key(d1, d2)] = Block{used, cols, row_lo(d1) - kPad, row_lo(d2) - kPad};
          used += std::size_t(rows) * cols;
        }
    first_active_ = std::size_t(p_) * p_;

    std::vector<Complex> out(used, Complex(0.0));
    for (const auto& [d1, d2] : active_)
      for (int i = row_lo(d1); i <= row_hi(d1); ++i)
        for (int j = row_lo(d2); j <= row_hi(d2); ++j)
          out[at(d1, d2, i, j)] = rho(i * levels_ + j, (i - d1) * levels_ + (j - d2));
    return out;
  }

  CMatrix unpad(const std::vector<Complex>& t) const {
    CMatrix rho = CMatrix::Zero(levels_ * levels_, levels_ * levels_);
    for (const auto& [d1, d2] : active_)
      for (int i = row_lo(d1); i <= row_hi(d1); ++i)
        for (int j = row_lo(d2); j <= row_hi(d2); ++j)
          rho(i * levels_ + j, (i - d1) * levels_ + (j - d2)) = t[at(d1, d2, i, j)];
    return rho;
  }

  // y = x + c z
  void axpy(std::vector<Complex>& y, const std::vector<Complex>& x, double c, const std::vector<Complex>& z) const {
    for (std::size_t n = first_active_; n < y.size(); ++n) y[n] = x[n] + c * z[n];
  }

  void add_scaled(std::vector<Complex>& y, double c, const std::vector<Complex>& z) const {
    for (std::size_t n = first_active_; n < y.size(); ++n) y[n] += c * z[n];
  }

  // rho(r, c) <- (rho(r, c) + conj rho(c, r))/2
  void symmetrize(std::vector<Complex>& t) const {
    for (const auto& [d1, d2] : active_) {
      if (std::pair(d1, d2) > std::pair(-d1, -d2)) continue;
      for (int i = row_lo(d1); i <= row_hi(d1); ++i)
        for (int j = row_lo(d2); j <= row_hi(d2); ++j) {
          Complex& x = t[at(d1, d2, i, j)];
          Complex& y = t[at(-d1, -d2, i - d1, j - d2)];
          const Complex avg = 0.5 * (x + std::conj(y));
          x = avg;
          y = std::conj(avg);
        }
    }
  }

  void apply(const std::vector<Complex>& in, std::vector<Complex>& out) const {
    const bool pia = gen_.kind_k == ParametricKind::pia;
    const bool has_k = gen_.k != 0.0;
    const double kk = gen_.k;
    const double h = 0.5 * gen_.k;
    const double* s = s_.data();
    const auto sq2 = [s](int x) { return x >= 2 ? s[x] * s[x - 1] : 0.0; };
    const Complex* x = in.data();

    for (const auto& [d1, d2] : active_) {
      const int j_lo = row_lo(d2);
      const int j_hi = row_hi(d2);
      for (int i = row_lo(d1); i <= row_hi(d1); ++i) {
        const int k = i - d1;
        const double diag_ik = -0.5 * (down_a_ * (i + k) + up_a_ * (e_[i] + e_[k]));
        const double a_down = down_a_ * s[i + 1] * s[k + 1];
        const double a_up = up_a_ * s[i] * s[k];
        const Complex* self = x + row(d1, d2, i);
        const Complex* self_down = x + row(d1, d2, i + 1);
        const Complex* self_up = x + row(d1, d2, i - 1);
        Complex* y = out.data() + row(d1, d2, i);

        for (int j = j_lo; j <= j_hi; ++j) {
          const int l = j - d2;
          Complex acc = (diag_ik - 0.5 * (down_b_ * (j + l) + up_b_ * (e_[j] + e_[l]))) * self[j];
          acc += a_down * self_down[j] + a_up * self_up[j];
          acc += (down_b_ * s[j + 1] * s[l + 1]) * self[j + 1];
          acc += (up_b_ * s[j] * s[l]) * self[j - 1];
          y[j] = acc;
        }
        if (!has_k) continue;
        if (pia) {
          // K(a^dag b^dag rho - a b rho - rho a^dag b^dag + rho a b)
          const Complex* lo_up = x + row(d1 - 1, d2 - 1, i - 1);
          const Complex* lo_self = x + row(d1 - 1, d2 - 1, i);
          const Complex* hi_down = x + row(d1 + 1, d2 + 1, i + 1);
          const Complex* hi_self = x + row(d1 + 1, d2 + 1, i);
          const double ci_up = kk * s[i];
          const double ci_down = -kk * s[i + 1];
          const double ck_up = -kk * s[k + 1];
          const double ck_down = kk * s[k];
          for (int j = j_lo; j <= j_hi; ++j) {
            const int l = j - d2;
            y[j] += (ci_up * s[j]) * lo_up[j - 1] + (ci_down * s[j + 1]) * hi_down[j + 1] +
                    (ck_up * s[l + 1]) * lo_self[j] + (ck_down * s[l]) * hi_self[j];
          }
        } else {
          // h(a^2 rho - a^dag^2 rho - rho a^2 + rho a^dag^2)
          //   - h(b^2 rho - b^dag^2 rho - rho b^2 + rho b^dag^2)
          const double c_a = h * s[i + 1] * s[i + 2];
          const double c_ad = -h * sq2(i);
          const double c_ra = -h * sq2(k);
          const double c_rad = h * s[k + 1] * s[k + 2];
          const Complex* a2 = x + row(d1 + 2, d2, i + 2);
          const Complex* ad2 = x + row(d1 - 2, d2, i - 2);
          const Complex* ra2 = x + row(d1 + 2, d2, i);
          const Complex* rad2 = x + row(d1 - 2, d2, i);
          const Complex* b_hi = x + row(d1, d2 + 2, i);
          const Complex* b_lo = x + row(d1, d2 - 2, i);
          for (int j = j_lo; j <= j_hi; ++j) {
            const int l = j - d2;
            Complex acc = c_a * a2[j] + c_ad * ad2[j] + c_ra * ra2[j] + c_rad * rad2[j];
            acc -= (h * s[j + 1] * s[j + 2]) * b_hi[j + 2];
            acc += (h * sq2(j)) * b_lo[j - 2];
            acc += (h * sq2(l)) * b_hi[j];
            acc -= (h * s[l + 1] * s[l + 2]) * b_lo[j];
            y[j] += acc;
          }
        }
      }
    }
  }

 private:
  struct Block {
    std::size_t offset;
    int stride;
    int row_min;
    int col_min;
  };

  std::size_t key(int d1, int d2) const { return std::size_t(d1 + n_ + kPad) * keys_ + (d2 + n_ + kPad); }
  // Offset of column 0 of row i in block (d1, d2).
  std::ptrdiff_t row(int d1, int d2, int i) const {
    const Block& b = blocks_[key(d1, d2)];
    return std::ptrdiff_t(b.offset) + std::ptrdiff_t(i - b.row_min) * b.stride - b.col_min;
  }
  std::size_t at(int d1, int d2, int i, int j) const { return std::size_t(row(d1, d2, i) + j); }
  int row_lo(int d) const { return std::max(0, d); }
  int row_hi(int d) const { return std::min(n_, n_ + d); }

  int n_;
  int levels_;
  int p_;
  int keys_;
  PhysicalGenerator gen_;
  std::vector<double> s_;
  std::vector<double> e_;
  double down_a_ = 0.0, up_a_ = 0.0, down_b_ = 0.0, up_b_ = 0.0;
  std::vector<std::pair<int, int>> active_;
  std::vector<Block> blocks_;
  std::size_t first_active_ = 0;
};

inline int default_steps(const LiouvillianStencil& stencil, double t) {
  const double stable = t * stencil.spectral_bound() / 2.5;
  const double accurate = t * stencil.rate_scale() / 0.05;
  return std::max(1, static_cast<int>(std::ceil(std::max(stable, accurate))));
}

// Observer receives (time, density) at every requested sample time.
using LindbladObserver = std::function<void(double, const FockState&)>;

inline FockState rk4_evolve(const FockState& state, const PhysicalGenerator& gen, double t, int steps,
                            const std::vector<double>& sample_times, const LindbladObserver& observer) {
  LiouvillianStencil stencil(gen, state.n_max());
  std::vector<Complex> rho = stencil.load(state.density());
  std::vector<Complex> acc(rho.size(), Complex(0.0));
  std::vector<Complex> tmp(rho.size(), Complex(0.0));
  std::vector<Complex> k(rho.size(), Complex(0.0));
  const double dt = t / steps;

  const auto emit = [&](double time) {
    if (observer) observer(time, FockState::mixed(state.n_max(), stencil.unpad(rho), state.norm_deficit()));
  };
  std::size_t next_sample = 0;
  while (next_sample < sample_times.size() && sample_times[next_sample] <= 0.0) {
    emit(0.0);
    ++next_sample;
  }
  for (int step = 1; step <= steps; ++step) {
    stencil.apply(rho, k);
    stencil.axpy(acc, rho, dt / 6.0, k);
    stencil.axpy(tmp, rho, 0.5 * dt, k);
    stencil.apply(tmp, k);
    stencil.add_scaled(acc, dt / 3.0, k);
    stencil.axpy(tmp, rho, 0.5 * dt, k);
    stencil.apply(tmp, k);
    stencil.add_scaled(acc, dt / 3.0, k);
    stencil.axpy(tmp, rho, dt, k);
    stencil.apply(tmp, k);
    stencil.axpy(rho, acc, dt / 6.0, k);
    stencil.symmetrize(rho);

    const double now = step * dt;
    while (next_sample < sample_times.size() && sample_times[next_sample] <= now + 1e-12 * t) {
      emit(now);
      ++next_sample;
    }
  }
  return FockState::mixed(state.n_max(), stencil.unpad(rho), state.norm_deficit());
}

}  // namespace detail

// Integrates the full master equation of `gen` with fixed-step RK4. Sample
// times must be multiples of t/steps to be reported exactly; `observer` sees
// the state at each of them. With options.verify the run is repeated at half
// the step and a StepSizeError is raised when moments differ by more than
// options.step_tolerance.
inline FockState lindblad_evolve_fock(const FockState& state, const PhysicalGenerator& gen, double t,
                                      const LindbladOptions& options = {},
                                      const std::vector<double>& sample_times = {},
                                      const detail::LindbladObserver& observer = {}) {
  gen.validate();
  twinbeam::detail::require_domain(t >= 0.0, "evolution time must be non-negative");
  if (t == 0.0) return FockState::mixed(state.n_max(), state.density(), state.norm_deficit());
  const int steps = options.steps > 0 ? options.steps : detail::default_steps(detail::LiouvillianStencil(gen, state.n_max()), t);
  if (!options.verify) return detail::rk4_evolve(state, gen, t, steps, sample_times, observer);

  const FockState coarse = detail::rk4_evolve(state, gen, t, steps, {}, {});
  const FockState fine = detail::rk4_evolve(state, gen, t, 2 * steps, sample_times, observer);
  const double change = max_abs_difference(moments_fock(coarse), moments_fock(fine));
  if (!(change <= options.step_tolerance)) {
    std::ostringstream msg;
    msg << "RK4 with " << steps << " steps is not converged: halving the step changes moments by " << change;
    throw StepSizeError(msg.str());
  }
  return fine;
}

}  // namespace twinbeam::fock
