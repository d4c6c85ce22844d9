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
#include <cstdint>
#include <string>

#include "cpdm/polar.hpp"
#include "cpdm/raster.hpp"

namespace cpdm {

struct FilterCell {
    Color color;
    Angle angle;
    friend bool operator==(const FilterCell&, const FilterCell&) = default;
};

/// 4x4 superpixel of the color-polarization filter array, tiled periodically over the sensor.
class CpfaLayout {
public:
    static constexpr std::size_t kPeriod = 4;

    /// Validates the tile; throws a structural error if it is not a valid superpixel.
    explicit CpfaLayout(const std::array<std::array<FilterCell, 4>, 4>& tile);

    const FilterCell& cell(std::size_t row, std::size_t col) const noexcept {
        return tile_[row % kPeriod][col % kPeriod];
    }

    /// Tile positions (row, col) carrying the requested pair, in row-major order.
    std::vector<std::pair<std::size_t, std::size_t>> positions(Color c, Angle a) const;

    /// Two-character codes such as "R90" or "G135", as a 4x4 JSON array.
    std::string to_json() const;
    static CpfaLayout from_json(const std::string& text);

    friend bool operator==(const CpfaLayout&, const CpfaLayout&) = default;

private:
    std::array<std::array<FilterCell, 4>, 4> tile_;
};

/// RGGB color blocks; each 2x2 block reads 90/45 on top, 135/0 below.
CpfaLayout default_layout();

std::string cell_code(const FilterCell& cell);
FilterCell parse_cell_code(const std::string& code);

struct CpfaMosaic {
    Raster raster;
    CpfaLayout layout;
};

struct NoiseModel {
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

/// Selection operator: each sensor pixel keeps the plane its filter cell names.
CpfaMosaic mosaic(const PolarCube& cube, const CpfaLayout& layout);

/// Adds sigma * N(0,1) per pixel. Each normal deviate is a pure function of (seed, pixel index).
CpfaMosaic add_noise(const CpfaMosaic& m, const NoiseModel& noise);

/// Counter-based standard normal deviate.
double counter_normal(std::uint64_t seed, std::uint64_t counter) noexcept;

}  // namespace cpdm
