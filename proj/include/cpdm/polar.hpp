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
#include <cstddef>
#include <string_view>

#include "cpdm/raster.hpp"

namespace cpdm {

enum class Angle : int { Deg0 = 0, Deg45 = 1, Deg90 = 2, Deg135 = 3 };
enum class Color : int { R = 0, G = 1, B = 2 };

inline constexpr std::array<Angle, 4> kAngles{Angle::Deg0, Angle::Deg45, Angle::Deg90, Angle::Deg135};
inline constexpr std::array<Color, 3> kColors{Color::R, Color::G, Color::B};
inline constexpr std::size_t kPlaneCount = 12;

constexpr int degrees(Angle a) noexcept { return 45 * static_cast<int>(a); }
constexpr char color_code(Color c) noexcept { return "RGB"[static_cast<int>(c)]; }

/// Planes are stored angle-major: index = 3 * angle + color.
constexpr std::size_t plane_index(Angle a, Color c) noexcept {
    return 3 * static_cast<std::size_t>(a) + static_cast<std::size_t>(c);
}

/// Full-resolution 4-angle x RGB image.
class PolarCube {
public:
    PolarCube() = default;
    PolarCube(std::size_t height, std::size_t width, double fill = 0.0);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }

    Raster& plane(Angle a, Color c) noexcept { return planes_[plane_index(a, c)]; }
    const Raster& plane(Angle a, Color c) const noexcept { return planes_[plane_index(a, c)]; }
    Raster& plane(std::size_t idx) noexcept { return planes_[idx]; }
    const Raster& plane(std::size_t idx) const noexcept { return planes_[idx]; }

    bool same_shape(const PolarCube& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }
    bool all_finite() const noexcept;

    /// Throws a structural error unless every plane matches the cube dimensions.
    void check_consistent() const;

    friend bool operator==(const PolarCube&, const PolarCube&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::array<Raster, kPlaneCount> planes_;
};

/// Per-color Stokes rasters. aop is in radians, (-pi/2, pi/2].
struct StokesMap {
    std::array<Raster, 3> s0, s1, s2, dop, aop;

    std::size_t height() const noexcept { return s0[0].height(); }
    std::size_t width() const noexcept { return s0[0].width(); }

    /// Per-color arithmetic mean of dop.
    Raster mean_dop() const;
    /// Per-color axial mean of aop (doubled-angle average), radians.
    Raster mean_aop() const;
};

inline constexpr double kDefaultDopEps = 1e-6;

/// Stokes parameters, DOP and AOP for one pixel.
struct StokesPixel {
    double s0, s1, s2, dop, aop;
};

StokesPixel stokes_pixel(double x0, double x45, double x90, double x135, double eps = kDefaultDopEps) noexcept;

StokesMap compute_stokes(const PolarCube& cube, double eps = kDefaultDopEps);

/// Four analyzer intensities x(theta) = (S0 + S1 cos 2theta + S2 sin 2theta) / 2.
std::array<double, 4> synthesize_pixel(double s0, double dop, double aop) noexcept;

/// Builds a cube whose three color channels share the given s0/dop/aop rasters.
PolarCube synthesize_from_stokes(const Raster& s0, const Raster& dop, const Raster& aop);

/// Per-color variant.
PolarCube synthesize_from_stokes(const std::array<Raster, 3>& s0, const std::array<Raster, 3>& dop,
                                 const std::array<Raster, 3>& aop);

/// Mean of squared differences over all 12*H*W entries, summed plane by plane in row-major order.
double mse_loss(const PolarCube& a, const PolarCube& b);

}  // namespace cpdm
