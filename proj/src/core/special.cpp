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
#include "cpdm/special.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace cpdm::special {

namespace {

constexpr double kSeriesLimit = 15.0;

// Power series sum_k (x^2/4)^k / (k!)^2; all terms are positive.
double i0_series(double x) noexcept {
    const double q = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 500; ++k) {
        term *= q / (static_cast<double>(k) * static_cast<double>(k));
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum;
}

// exp(-x) I0(x) ~ (2 pi x)^-1/2 * sum_k ((2k-1)!!)^2 / (k! (8x)^k), truncated at the smallest term.
double i0e_asymptotic(double x) noexcept {
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (8.0 * k * x);
        if (next >= term) break;
        term = next;
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum / std::sqrt(2.0 * std::numbers::pi * x);
}

constexpr std::array<double, 15> kKronrodNodes = {
    -0.991455371120812639206854697526329, -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926, -0.741531185599394439863864773280788,
    -0.586087235467691130294144845693013, -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245, 0.0,
    0.207784955007898467600689403773245,  0.405845151377397166906606412076961,
    0.586087235467691130294144845693013,  0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,  0.949107912342758524526189684047851,
    0.991455371120812639206854697526329};
constexpr std::array<double, 15> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
    0.204432940075298892414161999234649, 0.190350578064785409913256402421014,
    0.169004726639267902826583426598550, 0.140653259715525918745189590510238,
    0.104790010322250183839876322541518, 0.063092092629978553290700663189204,
    0.022935322010529224963732008058970};
// Gauss weights for the odd-indexed Kronrod nodes.
constexpr std::array<double, 7> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
    0.381830050505118944950369775488975, 0.279705391489276667901467771423780,
    0.129484966168869693270611432679082};

double gk15(const std::function<double(double)>& f, double a, double b, double& err) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double kronrod = 0.0, gauss = 0.0;
    for (std::size_t i = 0; i < kKronrodNodes.size(); ++i) {
        const double v = f(mid + half * kKronrodNodes[i]);
        kronrod += kKronrodWeights[i] * v;
        if (i % 2 == 1) gauss += kGaussWeights[i / 2] * v;
    }
    err = std::abs((kronrod - gauss) * half);
    return kronrod * half;
}

double adapt(const std::function<double(double)>& f, double a, double b, double whole, double err,
             double abs_tol, double rel_tol, int depth) {
    if (err <= std::max(abs_tol, rel_tol * std::abs(whole)) || depth <= 0) return whole;
    const double mid = 0.5 * (a + b);
    double el = 0.0, er = 0.0;
    const double left = gk15(f, a, mid, el);
    const double right = gk15(f, mid, b, er);
    return adapt(f, a, mid, left, el, 0.5 * abs_tol, rel_tol, depth - 1) +
           adapt(f, mid, b, right, er, 0.5 * abs_tol, rel_tol, depth - 1);
}

}  // namespace

double bessel_i0e(double x) noexcept {
    x = std::abs(x);
    if (x < kSeriesLimit) return i0_series(x) * std::exp(-x);
    return i0e_asymptotic(x);
}

double log_bessel_i0(double x) noexcept {
    x = std::abs(x);
    if (x < kSeriesLimit) return std::log(i0_series(x));
    return std::log(i0e_asymptotic(x)) + x;
}

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol, double rel_tol,
                 int max_depth) {
    if (a == b) return 0.0;
    if (b < a) return -integrate(f, b, a, abs_tol, rel_tol, max_depth);
    double err = 0.0;
    const double whole = gk15(f, a, b, err);
    return adapt(f, a, b, whole, err, abs_tol, rel_tol, max_depth);
}

double normal_cdf(double x, double mean, double stddev) noexcept {
    return 0.5 * std::erfc(-(x - mean) / (stddev * std::numbers::sqrt2));
}

}  // namespace cpdm::special
