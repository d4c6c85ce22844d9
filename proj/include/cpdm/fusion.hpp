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

#include <array>

#include "cpdm/polar.hpp"
#include "cpdm/raster.hpp"

namespace cpdm {

/// Normalized log polarization uncertainty in [0, 1], with the percentile anchors that produced it.
struct FusionWeights {
    Raster s_bar;
    double lo = 0.0;  // value of s mapped to 0
    double hi = 0.0;  // value of s mapped to 1
    double lo_pct = 1.0;
    double hi_pct = 99.0;
    bool degenerate = false;  // hi == lo, everything mapped to 0.5
};

/// Linear-interpolated percentile (0..100) of the values.
double percentile(std::span<const double> values, double pct);

/// Robust min-max: [pct(lo), pct(hi)] -> [0, 1], clamped.
FusionWeights normalize_log_uncertainty(const Raster& s, double lo_pct = 1.0, double hi_pct = 99.0);

/// Mean over all entries of s_bar (x - x_sd)^2 + (1 - s_bar)(x - x_b)^2, s_bar broadcast over planes.
double fusion_loss(const PolarCube& x_final, const PolarCube& x_b, const PolarCube& x_sd, const FusionWeights& w);

/// Pointwise minimizer of fusion_loss: s_bar x_sd + (1 - s_bar) x_b.
PolarCube fuse(const PolarCube& x_b, const PolarCube& x_sd, const FusionWeights& w);

/// Same, with one weight map per color channel.
PolarCube fuse(const PolarCube& x_b, const PolarCube& x_sd, const std::array<FusionWeights, 3>& w);

}  // namespace cpdm
