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
#include "cpdm/demosaic.hpp"

#include "cpdm/error.hpp"

namespace cpdm {

namespace {

/// Samples on the regular grid (row_offset + row_step * a, col_offset + col_step * b).
struct Lattice {
    std::size_t row_offset, col_offset;
    std::size_t row_step, col_step;
    std::size_t rows, cols;  // number of lattice points inside the image

    Lattice(std::size_t ro, std::size_t co, std::size_t rs, std::size_t cs, std::size_t h, std::size_t w)
        : row_offset(ro), col_offset(co), row_step(rs), col_step(cs), rows((h - ro + rs - 1) / rs),
          cols((w - co + cs - 1) / cs) {}
};

/// Linear weights of position `pos` between lattice indices lo and lo + 1 (mirror-reflected).
struct Tap {
    std::size_t lo, hi;
    double frac;
};

Tap lattice_tap(std::size_t pos, std::size_t offset, std::size_t step, std::size_t count) {
    const auto d = static_cast<std::ptrdiff_t>(pos) - static_cast<std::ptrdiff_t>(offset);
    const auto s = static_cast<std::ptrdiff_t>(step);
    std::ptrdiff_t base = d >= 0 ? d / s : -((-d + s - 1) / s);
    const double frac = static_cast<double>(d - base * s) / static_cast<double>(s);
    const auto n = static_cast<std::ptrdiff_t>(count);
    return {static_cast<std::size_t>(reflect101(base, n)), static_cast<std::size_t>(reflect101(base + 1, n)), frac};
}

inline double lerp_tap(double lo, double hi, double frac) noexcept {
    // frac == 0 must reproduce the sample exactly
    return frac == 0.0 ? lo : (1.0 - frac) * lo + frac * hi;
}

/// Separable bilinear interpolation of lattice values (rows x cols, row-major) to the full image.
Raster bilinear_from_lattice(const Lattice& lat, const Raster& coarse, std::size_t h, std::size_t w) {
    std::vector<Tap> col_taps(w), row_taps(h);
    for (std::size_t c = 0; c < w; ++c) col_taps[c] = lattice_tap(c, lat.col_offset, lat.col_step, lat.cols);
    for (std::size_t r = 0; r < h; ++r) row_taps[r] = lattice_tap(r, lat.row_offset, lat.row_step, lat.rows);

    Raster wide(lat.rows, w);
    for (std::size_t a = 0; a < lat.rows; ++a) {
        for (std::size_t c = 0; c < w; ++c) {
            const Tap& t = col_taps[c];
            wide(a, c) = lerp_tap(coarse(a, t.lo), coarse(a, t.hi), t.frac);
        }
    }
    Raster out(h, w);
    for (std::size_t r = 0; r < h; ++r) {
        const Tap& t = row_taps[r];
        for (std::size_t c = 0; c < w; ++c) out(r, c) = lerp_tap(wide(t.lo, c), wide(t.hi, c), t.frac);
    }
    return out;
}

Raster gather(const Lattice& lat, const Raster& src) {
    Raster coarse(lat.rows, lat.cols);
    for (std::size_t a = 0; a < lat.rows; ++a) {
        for (std::size_t b = 0; b < lat.cols; ++b) {
            coarse(a, b) = src(lat.row_offset + a * lat.row_step, lat.col_offset + b * lat.col_step);
        }
    }
    return coarse;
}

/// Interpolates one sparse plane whose samples occupy the given tile positions.
Raster interpolate_plane(const Raster& values, const std::vector<std::pair<std::size_t, std::size_t>>& pos) {
    const std::size_t h = values.height(), w = values.width();
    if (pos.size() == 1) {
        const Lattice lat(pos[0].first, pos[0].second, 4, 4, h, w);
        return bilinear_from_lattice(lat, gather(lat, values), h, w);
    }
    const std::size_t dr = (pos[1].first + 4 - pos[0].first) % 4;
    const std::size_t dc = (pos[1].second + 4 - pos[0].second) % 4;
    if (dr == 0) {
        const Lattice lat(pos[0].first, pos[0].second % 2, 4, 2, h, w);
        return bilinear_from_lattice(lat, gather(lat, values), h, w);
    }
    if (dc == 0) {
        const Lattice lat(pos[0].first % 2, pos[0].second, 2, 4, h, w);
        return bilinear_from_lattice(lat, gather(lat, values), h, w);
    }
    // Quincunx: the samples fill a checkerboard of the stride-2 grid. Complete the grid with the
    // four-neighbour mean, then interpolate bilinearly from it.
    const Lattice lat(pos[0].first % 2, pos[0].second % 2, 2, 2, h, w);
    Raster coarse = gather(lat, values);
    const std::size_t parity = (pos[0].first / 2 + pos[0].second / 2) % 2;
    const auto na = static_cast<std::ptrdiff_t>(lat.rows);
    const auto nb = static_cast<std::ptrdiff_t>(lat.cols);
    Raster filled = coarse;
    for (std::ptrdiff_t a = 0; a < na; ++a) {
        for (std::ptrdiff_t b = 0; b < nb; ++b) {
            if (static_cast<std::size_t>(a + b) % 2 == parity) continue;
            const double sum = coarse(static_cast<std::size_t>(reflect101(a - 1, na)), static_cast<std::size_t>(b)) +
                               coarse(static_cast<std::size_t>(reflect101(a + 1, na)), static_cast<std::size_t>(b)) +
                               coarse(static_cast<std::size_t>(a), static_cast<std::size_t>(reflect101(b - 1, nb))) +
                               coarse(static_cast<std::size_t>(a), static_cast<std::size_t>(reflect101(b + 1, nb)));
            filled(static_cast<std::size_t>(a), static_cast<std::size_t>(b)) = 0.25 * sum;
        }
    }
    return bilinear_from_lattice(lat, filled, h, w);
}

void check_mosaic(const CpfaMosaic& m) {
    const std::size_t h = m.raster.height(), w = m.raster.width();
    if (h == 0 || w == 0 || h % 4 != 0 || w % 4 != 0) {
        fail(ErrorKind::Structural, "mosaic dimensions " + std::to_string(h) + "x" + std::to_string(w) +
                                        " are not a positive multiple of 4");
    }
}

}  // namespace

SparsePlanes split_channels(const CpfaMosaic& m) {
    check_mosaic(m);
    SparsePlanes sp;
    sp.height = m.raster.height();
    sp.width = m.raster.width();
    sp.layout = m.layout;
    for (std::size_t p = 0; p < kPlaneCount; ++p) {
        sp.values[p] = Raster(sp.height, sp.width);
        sp.masks[p] = Raster(sp.height, sp.width);
    }
    for (std::size_t r = 0; r < sp.height; ++r) {
        for (std::size_t c = 0; c < sp.width; ++c) {
            const FilterCell& cell = m.layout.cell(r, c);
            const std::size_t p = plane_index(cell.angle, cell.color);
            sp.values[p](r, c) = m.raster(r, c);
            sp.masks[p](r, c) = 1.0;
        }
    }
    return sp;
}

PolarCube interpolate_initial(const SparsePlanes& planes) {
    PolarCube cube(planes.height, planes.width);
    for (Angle a : kAngles) {
        for (Color c : kColors) {
            cube.plane(a, c) = interpolate_plane(planes.values[plane_index(a, c)], planes.layout.positions(c, a));
        }
    }
    return cube;
}

PolarCube reconstruct_base(const CpfaMosaic& m, double lambda_b) {
    PolarCube cube = interpolate_initial(split_channels(m));
    if (lambda_b == 0.0) return cube;
    const std::size_t h = cube.height(), w = cube.width();
    for (Angle a : kAngles) {
        const Raster& green = cube.plane(a, Color::G);
        for (Color c : {Color::R, Color::B}) {
            const auto pos = m.layout.positions(c, a);
            // Green resampled through the R/B lattice; its difference to the dense green estimate is
            // the high-frequency detail the sparser lattice cannot represent. It vanishes on samples.
            const Raster green_low = interpolate_plane(green, pos);
            Raster& plane = cube.plane(a, c);
            for (std::size_t i = 0; i < h * w; ++i) plane[i] += lambda_b * (green[i] - green_low[i]);
        }
    }
    return cube;
}

PolarCube regularize_polarization(const PolarCube& cube, double sigma_r) {
    if (sigma_r < 0.0) fail(ErrorKind::Config, "sigma_r must be non-negative");
    PolarCube out = cube;
    if (sigma_r == 0.0) return out;
    const std::size_t n = cube.height() * cube.width();
    for (Color c : kColors) {
        Raster s1(cube.height(), cube.width()), s2(cube.height(), cube.width());
        const Raster& x0 = cube.plane(Angle::Deg0, c);
        const Raster& x45 = cube.plane(Angle::Deg45, c);
        const Raster& x90 = cube.plane(Angle::Deg90, c);
        const Raster& x135 = cube.plane(Angle::Deg135, c);
        for (std::size_t i = 0; i < n; ++i) {
            s1[i] = x0[i] - x90[i];
            s2[i] = x45[i] - x135[i];
        }
        const Raster s1s = gaussian_blur(s1, sigma_r);
        const Raster s2s = gaussian_blur(s2, sigma_r);
        // Move only along the S1/S2 directions so S0 and the unpolarized residual are kept.
        for (std::size_t i = 0; i < n; ++i) {
            const double d1 = 0.5 * (s1s[i] - s1[i]);
            const double d2 = 0.5 * (s2s[i] - s2[i]);
            out.plane(Angle::Deg0, c)[i] += d1;
            out.plane(Angle::Deg90, c)[i] -= d1;
            out.plane(Angle::Deg45, c)[i] += d2;
            out.plane(Angle::Deg135, c)[i] -= d2;
        }
    }
    return out;
}

PolarCube reconstruct_smooth(const CpfaMosaic& m, const BranchParams& params) {
    return regularize_polarization(reconstruct_base(m, params.lambda_b), params.sigma_r);
}

BranchOutputs reconstruct_branches(const CpfaMosaic& m, const BranchParams& params) {
    BranchOutputs out;
    out.base = reconstruct_base(m, params.lambda_b);
    out.smooth = regularize_polarization(out.base, params.sigma_r);
    return out;
}

}  // namespace cpdm
