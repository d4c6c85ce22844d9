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

#include <cstddef>
#include <span>
#include <vector>

namespace cpdm {

/// Row-major scalar image in 64-bit floating point.
class Raster {
public:
    Raster() = default;
    Raster(std::size_t height, std::size_t width, double fill = 0.0)
        : height_(height), width_(width), data_(height * width, fill) {}

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t row, std::size_t col) noexcept { return data_[row * width_ + col]; }
    double operator()(std::size_t row, std::size_t col) const noexcept { return data_[row * width_ + col]; }
    double& operator[](std::size_t idx) noexcept { return data_[idx]; }
    double operator[](std::size_t idx) const noexcept { return data_[idx]; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    bool same_shape(const Raster& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    bool all_finite() const noexcept;

    friend bool operator==(const Raster&, const Raster&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> data_;
};

/// Reflect an index into [0, n) without repeating the edge sample (…2 1 0 1 2…).
inline std::ptrdiff_t reflect101(std::ptrdiff_t idx, std::ptrdiff_t n) noexcept {
    if (n == 1) return 0;
    const std::ptrdiff_t period = 2 * (n - 1);
    idx %= period;
    if (idx < 0) idx += period;
    return idx < n ? idx : period - idx;
}

/// Separable Gaussian blur with mirror boundaries. sigma == 0 returns the input unchanged.
Raster gaussian_blur(const Raster& src, double sigma);

}  // namespace cpdm
