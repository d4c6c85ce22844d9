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
#include <cmath>
#include <numbers>

#include <doctest.h>

#include "cpdm/special.hpp"

using namespace cpdm;

TEST_CASE("bessel_i0e agrees with the standard library") {
    for (double x = 0.0; x < 600.0; x += x < 30.0 ? 0.173 : 7.9) {
        const double ref = std::cyl_bessel_i(0.0, x) * std::exp(-x);
        CAPTURE(x);
        CHECK(special::bessel_i0e(x) == doctest::Approx(ref).epsilon(1e-12));
        CHECK(special::bessel_i0e(-x) == doctest::Approx(ref).epsilon(1e-12));
    }
    CHECK(special::bessel_i0e(0.0) == 1.0);
}

TEST_CASE("bessel_i0e large-argument behaviour") {
    for (double x : {1e3, 1e5, 1e8}) {
        const double lead = 1.0 / std::sqrt(2.0 * std::numbers::pi * x);
        CHECK(special::bessel_i0e(x) == doctest::Approx(lead * (1.0 + 1.0 / (8.0 * x))).epsilon(1e-9));
    }
}

TEST_CASE("log_bessel_i0 is finite and continuous") {
    CHECK(special::log_bessel_i0(0.0) == 0.0);
    CHECK(special::log_bessel_i0(1e6) == doctest::Approx(1e6 - 0.5 * std::log(2.0 * std::numbers::pi * 1e6)).epsilon(1e-12));
    for (double x = 0.01; x < 60.0; x += 0.01) {
        const double a = special::log_bessel_i0(x), b = special::log_bessel_i0(x + 1e-7);
        CHECK(std::abs(b - a) < 2e-7);
    }
}

TEST_CASE("integrate handles smooth and peaked integrands") {
    CHECK(special::integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK(special::integrate([](double x) { return std::exp(-x * x); }, -10.0, 10.0) ==
          doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-12));
    // Narrow peak inside a wide interval.
    const double s = 1e-3;
    const auto peak = [s](double x) { return std::exp(-0.5 * (x - 0.3) * (x - 0.3) / (s * s)); };
    CHECK(special::integrate(peak, 0.0, 1.0) == doctest::Approx(s * std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-9));
    CHECK(special::integrate(peak, 1.0, 0.0) == doctest::Approx(-s * std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-9));
}

TEST_CASE("normal_cdf") {
    CHECK(special::normal_cdf(0.0, 0.0, 1.0) == doctest::Approx(0.5));
    CHECK(special::normal_cdf(1.96, 0.0, 1.0) == doctest::Approx(0.9750021048517795).epsilon(1e-12));
    CHECK(special::normal_cdf(3.0, 1.0, 2.0) == doctest::Approx(special::normal_cdf(1.0, 0.0, 1.0)));
    CHECK(special::normal_cdf(-40.0, 0.0, 1.0) >= 0.0);
}
