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

// Deterministic scalar maximization on a bracket.

#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "twinbeam/errors.hpp"

namespace twinbeam {

struct ScalarOptimum {
  double x = 0.0;
  double value = 0.0;
};

// Counts strict interior local maxima of f sampled on `points` equispaced
// abscissae of [lo, hi]. Plateaus count once.
inline int count_local_maxima(const std::function<double(double)>& f, double lo, double hi, int points) {
  std::vector<double> values(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) values[i] = f(lo + (hi - lo) * i / (points - 1));
  int maxima = 0;
  bool rising = true;
  for (int i = 1; i < points; ++i) {
    if (values[i] > values[i - 1]) {
      rising = true;
    } else if (values[i] < values[i - 1]) {
      if (rising) ++maxima;
      rising = false;
    }
  }
  if (rising) ++maxima;  // maximum at the upper end
  return maxima;
}

// Golden-section search for the maximum of a unimodal f on [lo, hi]. A coarse
// pre-scan rejects objectives with several local maxima and narrows the bracket
// to the neighbourhood of the best sample.
inline ScalarOptimum golden_section_maximize(const std::function<double(double)>& f, double lo, double hi,
                                             double tol = 1e-10, int scan_points = 65) {
  detail::require_domain(hi >= lo, "empty optimization bracket");
  if (hi - lo <= tol) return {lo, f(lo)};
  if (count_local_maxima(f, lo, hi, scan_points) > 1) {
    throw OptimizationError("objective is not unimodal on the bracket");
  }
  int best = 0;
  double best_value = -INFINITY;
  const double h = (hi - lo) / (scan_points - 1);
  for (int i = 0; i < scan_points; ++i) {
    const double v = f(lo + h * i);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  double a = lo + h * std::max(0, best - 1);
  double b = lo + h * std::min(scan_points - 1, best + 1);

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  ScalarOptimum out{0.5 * (a + b), 0.0};
  out.value = f(out.x);
  // The scan may place the optimum on the bracket ends.
  for (double edge : {lo, hi}) {
    const double v = f(edge);
    if (v > out.value) out = {edge, v};
  }
  return out;
}

}  // namespace twinbeam
