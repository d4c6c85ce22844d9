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
#include "cpdm/cpfa.hpp"

#include <cmath>
#include <numbers>

#include <json.hpp>

#include "cpdm/error.hpp"

namespace cpdm {

std::string cell_code(const FilterCell& cell) {
    return std::string(1, color_code(cell.color)) + std::to_string(degrees(cell.angle));
}

FilterCell parse_cell_code(const std::string& code) {
    if (code.size() < 2) fail(ErrorKind::Input, "layout cell code '" + code + "' is too short");
    FilterCell cell{};
    switch (code[0]) {
        case 'R': cell.color = Color::R; break;
        case 'G': cell.color = Color::G; break;
        case 'B': cell.color = Color::B; break;
        default: fail(ErrorKind::Input, "layout cell code '" + code + "' has unknown color");
    }
    const std::string deg = code.substr(1);
    if (deg == "0") cell.angle = Angle::Deg0;
    else if (deg == "45") cell.angle = Angle::Deg45;
    else if (deg == "90") cell.angle = Angle::Deg90;
    else if (deg == "135") cell.angle = Angle::Deg135;
    else fail(ErrorKind::Input, "layout cell code '" + code + "' has unknown angle");
    return cell;
}

CpfaLayout::CpfaLayout(const std::array<std::array<FilterCell, 4>, 4>& tile) : tile_(tile) {
    int color_blocks[3] = {0, 0, 0};
    for (std::size_t br = 0; br < 2; ++br) {
        for (std::size_t bc = 0; bc < 2; ++bc) {
            const Color c = tile_[2 * br][2 * bc].color;
            unsigned angles_seen = 0;
            for (std::size_t r = 0; r < 2; ++r) {
                for (std::size_t col = 0; col < 2; ++col) {
                    const FilterCell& cell = tile_[2 * br + r][2 * bc + col];
                    if (cell.color != c) {
                        fail(ErrorKind::Structural, "layout: 2x2 block (" + std::to_string(br) + "," +
                                                        std::to_string(bc) + ") mixes colors");
                    }
                    angles_seen |= 1u << static_cast<unsigned>(cell.angle);
                }
            }
            if (angles_seen != 0xF) {
                fail(ErrorKind::Structural, "layout: 2x2 block (" + std::to_string(br) + "," +
                                                std::to_string(bc) + ") does not hold all four angles");
            }
            ++color_blocks[static_cast<int>(c)];
        }
    }
    if (color_blocks[0] != 1 || color_blocks[1] != 2 || color_blocks[2] != 1) {
        fail(ErrorKind::Structural, "layout: color blocks must be one R, two G and one B");
    }
    // Each green angle must sit on a regular lattice (the two cells differ by 2 along rows and/or columns).
    for (Angle a : kAngles) {
        const auto pos = positions(Color::G, a);
        const std::size_t dr = (pos[1].first + 4 - pos[0].first) % 4;
        const std::size_t dc = (pos[1].second + 4 - pos[0].second) % 4;
        if (dr % 2 != 0 || dc % 2 != 0) {
            fail(ErrorKind::Structural, "layout: green " + std::to_string(degrees(a)) +
                                            " cells do not form a regular lattice");
        }
    }
}

std::vector<std::pair<std::size_t, std::size_t>> CpfaLayout::positions(Color c, Angle a) const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t r = 0; r < kPeriod; ++r) {
        for (std::size_t col = 0; col < kPeriod; ++col) {
            if (tile_[r][col] == FilterCell{c, a}) out.emplace_back(r, col);
        }
    }
    return out;
}

std::string CpfaLayout::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : tile_) {
        nlohmann::json codes = nlohmann::json::array();
        for (const auto& cell : row) codes.push_back(cell_code(cell));
        rows.push_back(codes);
    }
    return rows.dump() + "\n";
}

CpfaLayout CpfaLayout::from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Input, std::string("layout: invalid JSON: ") + e.what());
    }
    if (!doc.is_array() || doc.size() != 4) fail(ErrorKind::Input, "layout: expected a 4x4 array");
    std::array<std::array<FilterCell, 4>, 4> tile{};
    for (std::size_t r = 0; r < 4; ++r) {
        if (!doc[r].is_array() || doc[r].size() != 4) fail(ErrorKind::Input, "layout: expected a 4x4 array");
        for (std::size_t c = 0; c < 4; ++c) {
            if (!doc[r][c].is_string()) fail(ErrorKind::Input, "layout: cell codes must be strings");
            tile[r][c] = parse_cell_code(doc[r][c].get<std::string>());
        }
    }
    return CpfaLayout(tile);
}

CpfaLayout default_layout() {
    constexpr Angle block[2][2] = {{Angle::Deg90, Angle::Deg45}, {Angle::Deg135, Angle::Deg0}};
    constexpr Color colors[2][2] = {{Color::R, Color::G}, {Color::G, Color::B}};
    std::array<std::array<FilterCell, 4>, 4> tile{};
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 4; ++c) tile[r][c] = {colors[r / 2][c / 2], block[r % 2][c % 2]};
    }
    return CpfaLayout(tile);
}

CpfaMosaic mosaic(const PolarCube& cube, const CpfaLayout& layout) {
    cube.check_consistent();
    if (cube.height() % CpfaLayout::kPeriod != 0 || cube.width() % CpfaLayout::kPeriod != 0) {
        fail(ErrorKind::Structural, "mosaic: dimensions " + std::to_string(cube.height()) + "x" +
                                        std::to_string(cube.width()) + " are not divisible by 4");
    }
    CpfaMosaic m{Raster(cube.height(), cube.width()), layout};
    for (std::size_t r = 0; r < cube.height(); ++r) {
        for (std::size_t c = 0; c < cube.width(); ++c) {
            const FilterCell& cell = layout.cell(r, c);
            m.raster(r, c) = cube.plane(cell.angle, cell.color)(r, c);
        }
    }
    return m;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

double counter_normal(std::uint64_t seed, std::uint64_t counter) noexcept {
    const std::uint64_t k = splitmix64(seed ^ splitmix64(counter));
    const std::uint64_t a = splitmix64(k);
    const std::uint64_t b = splitmix64(k + 1);
    // u1 in (0, 1], u2 in [0, 1)
    const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

CpfaMosaic add_noise(const CpfaMosaic& m, const NoiseModel& noise) {
    if (!(noise.sigma >= 0.0)) fail(ErrorKind::Domain, "add_noise: sigma must be non-negative");
    CpfaMosaic out = m;
    if (noise.sigma == 0.0) return out;
    for (std::size_t i = 0; i < out.raster.size(); ++i) out.raster[i] += noise.sigma * counter_normal(noise.seed, i);
    return out;
}

}  // namespace cpdm
