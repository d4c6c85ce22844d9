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
#include <random>

#include <doctest.h>

#include "cpdm/demosaic.hpp"
#include "cpdm/harness.hpp"
#include "cpdm/metrics.hpp"
#include "helpers.hpp"

using namespace cpdm;

namespace {

CpfaMosaic random_mosaic(std::size_t h, std::size_t w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return CpfaMosaic{test::random_raster(h, w, rng), default_layout()};
}

// Per-plane affine signal a + b*row + c*col with plane-specific coefficients.
PolarCube affine_cube(std::size_t h, std::size_t w) {
    PolarCube cube(h, w);
    for (std::size_t p = 0; p < kPlaneCount; ++p) {
        const double a = 0.1 + 0.03 * p, b = 0.002 * (static_cast<double>(p % 5) - 2.0),
                     c = 0.0015 * (static_cast<double>(p % 3) + 1.0);
        for (std::size_t r = 0; r < h; ++r) {
            for (std::size_t col = 0; col < w; ++col) {
                cube.plane(p)(r, col) = a + b * static_cast<double>(r) + c * static_cast<double>(col);
            }
        }
    }
    return cube;
}

double max_error_at_samples(const PolarCube& cube, const CpfaMosaic& m) {
    double worst = 0.0;
    for (std::size_t r = 0; r < m.raster.height(); ++r) {
        for (std::size_t c = 0; c < m.raster.width(); ++c) {
            const FilterCell cell = m.layout.cell(r, c);
            worst = std::max(worst, std::abs(cube.plane(cell.angle, cell.color)(r, c) - m.raster(r, c)));
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("split_channels partitions the mosaic") {
    const CpfaMosaic m = random_mosaic(12, 16, 1);
    const SparsePlanes sp = split_channels(m);
    CHECK(sp.height == 12);
    CHECK(sp.width == 16);
    for (std::size_t r = 0; r < 12; ++r) {
        for (std::size_t c = 0; c < 16; ++c) {
            int covered = 0;
            double sum = 0.0;
            for (std::size_t p = 0; p < kPlaneCount; ++p) {
                const double mask = sp.masks[p](r, c);
                CHECK((mask == 0.0 || mask == 1.0));
                covered += mask == 1.0;
                sum += mask * sp.values[p](r, c);
            }
            CHECK(covered == 1);
            CHECK(sum == m.raster(r, c));
            const FilterCell cell = m.layout.cell(r, c);
            CHECK(sp.masks[plane_index(cell.angle, cell.color)](r, c) == 1.0);
        }
    }
}

TEST_CASE("split_channels mask densities") {
    const SparsePlanes sp = split_channels(CpfaMosaic{Raster(16, 16, 0.25), default_layout()});
    for (Angle a : kAngles) {
        for (Color c : kColors) {
            const Raster& mask = sp.masks[plane_index(a, c)];
            double n = 0.0;
            for (double v : mask.values()) n += v;
            CHECK(n / 256.0 == doctest::Approx(c == Color::G ? 2.0 / 16 : 1.0 / 16));
        }
    }
}

TEST_CASE("constant mosaics reconstruct to constant cubes") {
    const CpfaMosaic m{Raster(16, 20, 0.42), default_layout()};
    const PolarCube expected(16, 20, 0.42);
    CHECK(test::max_abs_diff(interpolate_initial(split_channels(m)), expected) < 1e-12);
    CHECK(test::max_abs_diff(reconstruct_base(m), expected) < 1e-12);
    CHECK(test::max_abs_diff(reconstruct_smooth(m), expected) < 1e-12);
}

TEST_CASE("initial interpolation reproduces affine planes in the interior") {
    const std::size_t h = 32, w = 40;
    const PolarCube gt = affine_cube(h, w);
    const PolarCube rec = interpolate_initial(split_channels(mosaic(gt, default_layout())));
    double worst = 0.0;
    for (std::size_t p = 0; p < kPlaneCount; ++p) {
        for (std::size_t r = 4; r + 4 < h; ++r) {
            for (std::size_t c = 4; c + 4 < w; ++c) worst = std::max(worst, std::abs(rec.plane(p)(r, c) - gt.plane(p)(r, c)));
        }
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("initial and base reconstructions pass through the samples") {
    const CpfaMosaic m = random_mosaic(16, 24, 9);
    CHECK(max_error_at_samples(interpolate_initial(split_channels(m)), m) < 1e-9);
    CHECK(max_error_at_samples(reconstruct_base(m), m) < 1e-9);
    CHECK(max_error_at_samples(reconstruct_base(m, 1.0), m) < 1e-9);
}

TEST_CASE("mosaic of a reconstruction gives back the mosaic") {
    const CpfaMosaic m = random_mosaic(8, 8, 21);
    const PolarCube rec = reconstruct_base(m);
    const CpfaMosaic again = mosaic(rec, m.layout);
    CHECK(test::max_abs_diff(again.raster, m.raster) < 1e-9);
}

TEST_CASE("base with zero lambda equals the initial interpolation bit for bit") {
    const CpfaMosaic m = random_mosaic(12, 12, 5);
    CHECK(reconstruct_base(m, 0.0) == interpolate_initial(split_channels(m)));
}

TEST_CASE("smooth with zero sigma equals base") {
    const CpfaMosaic m = random_mosaic(12, 12, 6);
    CHECK(test::max_abs_diff(reconstruct_smooth(m, {0.5, 0.0}), reconstruct_base(m, 0.5)) < 1e-9);
}

TEST_CASE("smooth branch leaves S0 untouched and smooths S1, S2") {
    const CpfaMosaic m = random_mosaic(16, 16, 8);
    const PolarCube base = reconstruct_base(m);
    const PolarCube smooth = regularize_polarization(base, 1.5);
    for (Color c : kColors) {
        for (std::size_t i = 0; i < 256; ++i) {
            const double s0b = base.plane(Angle::Deg0, c)[i] + base.plane(Angle::Deg90, c)[i];
            const double s0s = smooth.plane(Angle::Deg0, c)[i] + smooth.plane(Angle::Deg90, c)[i];
            const double s0b2 = base.plane(Angle::Deg45, c)[i] + base.plane(Angle::Deg135, c)[i];
            const double s0s2 = smooth.plane(Angle::Deg45, c)[i] + smooth.plane(Angle::Deg135, c)[i];
            CHECK(s0s == doctest::Approx(s0b).epsilon(1e-14));
            CHECK(s0s2 == doctest::Approx(s0b2).epsilon(1e-14));
        }
        Raster s1(16, 16), s1s(16, 16);
        for (std::size_t i = 0; i < 256; ++i) {
            s1[i] = base.plane(Angle::Deg0, c)[i] - base.plane(Angle::Deg90, c)[i];
            s1s[i] = smooth.plane(Angle::Deg0, c)[i] - smooth.plane(Angle::Deg90, c)[i];
        }
        CHECK(test::max_abs_diff(s1s, gaussian_blur(s1, 1.5)) < 1e-12);
    }
    test::require_error([&] { regularize_polarization(base, -1.0); }, ErrorKind::Config);
}

TEST_CASE("green-guided sharpening does not lose to plain interpolation on noiseless edge scenes") {
    for (const char* gen : {"edge-chart", "text-chart", "spheres"}) {
        for (std::uint64_t seed : {1u, 2u}) {
            const PolarCube gt = generate_scene(gen, 128, seed);
            const CpfaMosaic m = mosaic(gt, default_layout());
            const double p_init = full_report(interpolate_initial(split_channels(m)), gt, "", "", "").psnr_mean;
            const double p_base = full_report(reconstruct_base(m), gt, "", "", "").psnr_mean;
            CAPTURE(gen);
            CAPTURE(seed);
            CHECK(p_base >= p_init);
        }
    }
}

TEST_CASE("Stokes smoothing improves DOP on a noisy constant-DOP scene") {
    const PolarCube gt = generate_scene("constant-dop", 128, 1);
    const CpfaMosaic m = add_noise(mosaic(gt, default_layout()), {0.02, 3});
    const BranchOutputs b = reconstruct_branches(m);
    CHECK(full_report(b.smooth, gt, "", "", "").psnr_dop > full_report(b.base, gt, "", "", "").psnr_dop);
}

TEST_CASE("reconstruct_branches matches the separate entry points") {
    const CpfaMosaic m = random_mosaic(8, 12, 30);
    const BranchOutputs b = reconstruct_branches(m, {0.7, 2.0});
    CHECK(b.base == reconstruct_base(m, 0.7));
    CHECK(b.smooth == reconstruct_smooth(m, {0.7, 2.0}));
}
