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

#include <span>
#include <string>
#include <vector>

#include "cpdm/polar.hpp"
#include "cpdm/raster.hpp"

namespace cpdm {

inline constexpr double kPsnrCap = 99.0;

struct SsimParams {
    std::size_t window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
};

/// PSNR over a group of rasters treated as one signal, capped at kPsnrCap (also reported for zero MSE).
double psnr(std::span<const Raster* const> a, std::span<const Raster* const> b, double peak);
double psnr(const Raster& a, const Raster& b, double peak);

/// PSNR of angle rasters in degrees, using the 180-degree wraparound difference. Peak 90.
double psnr_angle_deg(const Raster& a, const Raster& b);

/// Mean local SSIM with a Gaussian window over the valid region.
double ssim(const Raster& a, const Raster& b, const SsimParams& params = {});

/// Mean of min(|d|, 180 - |d|) over pixels; inputs in degrees within (-90, 90].
double mae_aop(const Raster& a_deg, const Raster& b_deg);

Raster radians_to_degrees(const Raster& r);

struct MetricsReport {
    double psnr_mean = 0.0;
    double psnr_s0 = 0.0;
    double psnr_dop = 0.0;
    double psnr_aop = 0.0;
    double ssim_mean = 0.0;
    double ssim_s0 = 0.0;
    double ssim_dop = 0.0;
    double mae_deg = 0.0;
    std::string method;
    std::string scene;
    std::string config_hash;

    static std::vector<std::string> csv_header();
    std::vector<std::string> csv_row() const;
};

MetricsReport full_report(const PolarCube& recon, const PolarCube& gt, const std::string& method,
                          const std::string& scene, const std::string& config_hash);

}  // namespace cpdm
