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

#pragma once

#include <stdexcept>
#include <string>

namespace twinbeam {

// Argument outside the mathematical domain of an operation (e.g. lambda >= 1).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Input squeezing photons exceed the mean-photon budget.
class PowerConstraintError : public DomainError {
 public:
  using DomainError::DomainError;
};

// A structural precondition was violated (non-symplectic map, anisotropic
// distribution where an isotropic one is required, ...).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The requested case is outside what the model represents, e.g. conjugating
// a generator with asymmetric baths.
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Number-basis truncation too small for the requested parameters.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fixed-step integrator did not converge under step halving.
class StepSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OptimizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require_domain(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

inline void require_contract(bool ok, const std::string& what) {
  if (!ok) throw ContractError(what);
}

}  // namespace detail
}  // namespace twinbeam
