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
#include "cpdm/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cpdm/error.hpp"

namespace cpdm {

double percentile(std::span<const double> values, double pct) {
    if (values.empty()) fail(ErrorKind::Domain, "percentile of an empty set");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double pos = pct / 100.0 * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return frac == 0.0 ? v[lo] : v[lo] + frac * (v[hi] - v[lo]);
}

FusionWeights normalize_log_uncertainty(const Raster& s, double lo_pct, double hi_pct) {
    if (!(lo_pct >= 0.0 && hi_pct <= 100.0 && lo_pct < hi_pct)) {
        fail(ErrorKind::Config, "normalization percentiles must satisfy 0 <= lo < hi <= 100");
    }
    if (!s.all_finite()) fail(ErrorKind::Domain, "normalize_log_uncertainty: non-finite log uncertainty");
    FusionWeights w;
    w.lo_pct = lo_pct;
    w.hi_pct = hi_pct;
    w.lo = percentile(s.values(), lo_pct);
    w.hi = percentile(s.values(), hi_pct);
    w.s_bar = Raster(s.height(), s.width(), 0.5);
    if (!(w.hi > w.lo)) {
        w.degenerate = true;
        return w;
    }
    const double span = w.hi - w.lo;
    for (std::size_t i = 0; i < s.size(); ++i) w.s_bar[i] = std::clamp((s[i] - w.lo) / span, 0.0, 1.0);
    return w;
}

namespace {

void check_shapes(const PolarCube& a, const PolarCube& b, const Raster& weights) {
    if (!a.same_shape(b) || weights.height() != a.height() || weights.width() != a.width()) {
        fail(ErrorKind::Structural, "fusion: cube / weight dimensions differ");
    }
}

void blend_plane(const Raster& xb, const Raster& xsd, const Raster& sbar, Raster& out) {
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double t = sbar[i];
        const double v = t * xsd[i] + (1.0 - t) * xb[i];
        out[i] = std::clamp(v, std::min(xb[i], xsd[i]), std::max(xb[i], xsd[i]));
    }
}

}  // namespace

double fusion_loss(const PolarCube& x_final, const PolarCube& x_b, const PolarCube& x_sd, const FusionWeights& w) {
    check_shapes(x_final, x_b, w.s_bar);
    check_shapes(x_final, x_sd, w.s_bar);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t p = 0; p < kPlaneCount; ++p) {
        const Raster& f = x_final.plane(p);
        const Raster& b = x_b.plane(p);
        const Raster& d = x_sd.plane(p);
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double t = w.s_bar[i];
            const double es = f[i] - d[i], eb = f[i] - b[i];
            sum += t * es * es + (1.0 - t) * eb * eb;
        }
        n += f.size();
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

PolarCube fuse(const PolarCube& x_b, const PolarCube& x_sd, const FusionWeights& w) {
    check_shapes(x_b, x_sd, w.s_bar);
    PolarCube out(x_b.height(), x_b.width());
    for (std::size_t p = 0; p < kPlaneCount; ++p) blend_plane(x_b.plane(p), x_sd.plane(p), w.s_bar, out.plane(p));
    return out;
}

PolarCube fuse(const PolarCube& x_b, const PolarCube& x_sd, const std::array<FusionWeights, 3>& w) {
    PolarCube out(x_b.height(), x_b.width());
    for (Color c : kColors) {
        const Raster& sbar = w[static_cast<std::size_t>(c)].s_bar;
        check_shapes(x_b, x_sd, sbar);
        for (Angle a : kAngles) blend_plane(x_b.plane(a, c), x_sd.plane(a, c), sbar, out.plane(a, c));
    }
    return out;
}

}  // namespace cpdm
