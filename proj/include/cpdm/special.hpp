/*
 * Copyright 2026 The cpdm Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <functional>

namespace cpdm::special {

/// Exponentially scaled modified Bessel function of the first kind, order zero: exp(-|x|) I0(x).
double bessel_i0e(double x) noexcept;

/// ln I0(x), finite for any finite x.
double log_bessel_i0(double x) noexcept;

/// Adaptive Gauss-Kronrod (7/15) quadrature of f over [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-12, double rel_tol = 1e-10, int max_depth = 40);

double normal_cdf(double x, double mean, double stddev) noexcept;

}  // namespace cpdm::special
