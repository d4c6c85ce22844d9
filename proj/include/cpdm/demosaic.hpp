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

#include "cpdm/cpfa.hpp"
#include "cpdm/polar.hpp"

namespace cpdm {

/// Mosaic samples routed per (color, angle) pair, with a mask of where each pair was observed.
struct SparsePlanes {
    std::size_t height = 0;
    std::size_t width = 0;
    CpfaLayout layout = default_layout();
    std::array<Raster, kPlaneCount> values;  // indexed like PolarCube planes
    std::array<Raster, kPlaneCount> masks;   // 1.0 where sampled, else 0.0
};

struct BranchParams {
    double lambda_b = 0.5;  // weight of the green high-pass residual added to R/B
    double sigma_r = 1.5;   // Stokes-domain smoothing of S1/S2, pixels
};

struct BranchOutputs {
    PolarCube base;
    PolarCube smooth;
};

SparsePlanes split_channels(const CpfaMosaic& m);

/// Bilinear interpolation of each plane on its sampling lattice, mirror boundaries.
PolarCube interpolate_initial(const SparsePlanes& planes);

/// Initial interpolation plus green-guided residual sharpening of the R and B planes.
PolarCube reconstruct_base(const CpfaMosaic& m, double lambda_b = BranchParams{}.lambda_b);

/// Base reconstruction with S1 and S2 Gaussian-regularized; S0 is left untouched.
PolarCube reconstruct_smooth(const CpfaMosaic& m, const BranchParams& params = {});

/// Applies the Stokes-domain regularization to an existing reconstruction.
PolarCube regularize_polarization(const PolarCube& cube, double sigma_r);

BranchOutputs reconstruct_branches(const CpfaMosaic& m, const BranchParams& params = {});

}  // namespace cpdm
