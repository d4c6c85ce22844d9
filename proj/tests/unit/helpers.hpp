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

#include <cmath>
#include <cstdint>
#include <random>

#include <doctest.h>

#include "cpdm/error.hpp"
#include "cpdm/polar.hpp"
#include "cpdm/raster.hpp"

namespace cpdm::test {

/// Runs f and checks it throws cpdm::Error of the given kind.
template <typename F>
void require_error(F&& f, ErrorKind kind) {
    bool thrown = false;
    try {
        f();
    } catch (const Error& e) {
        thrown = true;
        CHECK_MESSAGE(e.kind() == kind, "unexpected error kind: ", std::string(to_string(e.kind())), " (", e.what(), ")");
    }
    CHECK_MESSAGE(thrown, "expected an error of kind ", std::string(to_string(kind)));
}

inline Raster random_raster(std::size_t h, std::size_t w, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Raster r(h, w);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = u(rng);
    return r;
}

inline PolarCube random_cube(std::size_t h, std::size_t w, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    PolarCube c(h, w);
    for (std::size_t p = 0; p < kPlaneCount; ++p) c.plane(p) = random_raster(h, w, rng, lo, hi);
    return c;
}

inline double max_abs_diff(const Raster& a, const Raster& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double max_abs_diff(const PolarCube& a, const PolarCube& b) {
    double m = 0.0;
    for (std::size_t p = 0; p < kPlaneCount; ++p) m = std::max(m, max_abs_diff(a.plane(p), b.plane(p)));
    return m;
}

}  // namespace cpdm::test
