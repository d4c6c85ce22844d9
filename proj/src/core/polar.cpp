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
#include "cpdm/polar.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cpdm/error.hpp"

namespace cpdm {

PolarCube::PolarCube(std::size_t height, std::size_t width, double fill) : height_(height), width_(width) {
    for (auto& p : planes_) p = Raster(height, width, fill);
}

bool PolarCube::all_finite() const noexcept {
    return std::all_of(planes_.begin(), planes_.end(), [](const Raster& r) { return r.all_finite(); });
}

void PolarCube::check_consistent() const {
    for (std::size_t i = 0; i < kPlaneCount; ++i) {
        if (planes_[i].height() != height_ || planes_[i].width() != width_) {
            fail(ErrorKind::Structural, "cube plane " + std::to_string(i) + " is " +
                                            std::to_string(planes_[i].height()) + "x" +
                                            std::to_string(planes_[i].width()) + ", expected " +
                                            std::to_string(height_) + "x" + std::to_string(width_));
        }
    }
}

namespace {

double wrap_aop(double aop) noexcept {
    // atan2 / 2 lies in [-pi/2, pi/2]; fold the closed lower end onto pi/2.
    if (aop <= -std::numbers::pi / 2) aop += std::numbers::pi;
    return aop;
}

}  // namespace

StokesPixel stokes_pixel(double x0, double x45, double x90, double x135, double eps) noexcept {
    StokesPixel p{};
    p.s0 = std::max(0.5 * (x0 + x45 + x90 + x135), 0.0);
    p.s1 = x0 - x90;
    p.s2 = x45 - x135;
    const double pol = std::sqrt(p.s1 * p.s1 + p.s2 * p.s2);
    p.dop = std::clamp(pol / std::max(p.s0, eps), 0.0, 1.0);
    p.aop = (p.s1 == 0.0 && p.s2 == 0.0) ? 0.0 : wrap_aop(0.5 * std::atan2(p.s2, p.s1));
    return p;
}

StokesMap compute_stokes(const PolarCube& cube, double eps) {
    cube.check_consistent();
    if (!(eps > 0.0)) fail(ErrorKind::Domain, "compute_stokes: eps must be positive");
    const std::size_t h = cube.height(), w = cube.width();
    StokesMap m;
    for (Color c : kColors) {
        const auto ci = static_cast<std::size_t>(c);
        m.s0[ci] = m.s1[ci] = m.s2[ci] = m.dop[ci] = m.aop[ci] = Raster(h, w);
        const Raster& p0 = cube.plane(Angle::Deg0, c);
        const Raster& p45 = cube.plane(Angle::Deg45, c);
        const Raster& p90 = cube.plane(Angle::Deg90, c);
        const Raster& p135 = cube.plane(Angle::Deg135, c);
        for (std::size_t i = 0; i < h * w; ++i) {
            const StokesPixel p = stokes_pixel(p0[i], p45[i], p90[i], p135[i], eps);
            m.s0[ci][i] = p.s0;
            m.s1[ci][i] = p.s1;
            m.s2[ci][i] = p.s2;
            m.dop[ci][i] = p.dop;
            m.aop[ci][i] = p.aop;
        }
    }
    return m;
}

Raster StokesMap::mean_dop() const {
    Raster out(height(), width());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (dop[0][i] + dop[1][i] + dop[2][i]) / 3.0;
    return out;
}

Raster StokesMap::mean_aop() const {
    Raster out(height(), width());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double sx = 0.0, sy = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
            sx += std::cos(2.0 * aop[c][i]);
            sy += std::sin(2.0 * aop[c][i]);
        }
        out[i] = (sx == 0.0 && sy == 0.0) ? 0.0 : wrap_aop(0.5 * std::atan2(sy, sx));
    }
    return out;
}

std::array<double, 4> synthesize_pixel(double s0, double dop, double aop) noexcept {
    const double s1 = s0 * dop * std::cos(2.0 * aop);
    const double s2 = s0 * dop * std::sin(2.0 * aop);
    return {0.5 * (s0 + s1), 0.5 * (s0 + s2), 0.5 * (s0 - s1), 0.5 * (s0 - s2)};
}

PolarCube synthesize_from_stokes(const std::array<Raster, 3>& s0, const std::array<Raster, 3>& dop,
                                 const std::array<Raster, 3>& aop) {
    const std::size_t h = s0[0].height(), w = s0[0].width();
    for (std::size_t c = 0; c < 3; ++c) {
        if (!s0[c].same_shape(s0[0]) || !dop[c].same_shape(s0[0]) || !aop[c].same_shape(s0[0])) {
            fail(ErrorKind::Structural, "synthesize_from_stokes: raster dimensions differ");
        }
    }
    PolarCube cube(h, w);
    for (Color c : kColors) {
        const auto ci = static_cast<std::size_t>(c);
        for (std::size_t i = 0; i < h * w; ++i) {
            const double d = dop[ci][i];
            if (!(d >= 0.0 && d <= 1.0)) {
                fail(ErrorKind::Domain, "synthesize_from_stokes: dop " + std::to_string(d) + " outside [0,1]");
            }
            if (!(s0[ci][i] >= 0.0)) fail(ErrorKind::Domain, "synthesize_from_stokes: negative s0");
            const auto x = synthesize_pixel(s0[ci][i], d, aop[ci][i]);
            for (Angle a : kAngles) cube.plane(a, c)[i] = x[static_cast<std::size_t>(a)];
        }
    }
    return cube;
}

PolarCube synthesize_from_stokes(const Raster& s0, const Raster& dop, const Raster& aop) {
    return synthesize_from_stokes(std::array<Raster, 3>{s0, s0, s0}, std::array<Raster, 3>{dop, dop, dop},
                                  std::array<Raster, 3>{aop, aop, aop});
}

double mse_loss(const PolarCube& a, const PolarCube& b) {
    a.check_consistent();
    b.check_consistent();
    if (!a.same_shape(b)) fail(ErrorKind::Structural, "mse_loss: cube dimensions differ");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t p = 0; p < kPlaneCount; ++p) {
        const Raster& ra = a.plane(p);
        const Raster& rb = b.plane(p);
        for (std::size_t i = 0; i < ra.size(); ++i) {
            const double d = ra[i] - rb[i];
            sum += d * d;
        }
        n += ra.size();
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace cpdm
