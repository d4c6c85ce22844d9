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
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "cpdm/error.hpp"
#include "cpdm/harness.hpp"

namespace cpdm {

namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

/// splitmix64 stream; platform independent, unlike the std distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed * 0x9E3779B97F4A7C15ull + 0x632BE59BD9B4E019ull) {}
    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

private:
    std::uint64_t state_;
};

/// Scene expressed as per-pixel luminance, color tint, DOP and AOP; S0 per color = luminance * tint.
struct StokesScene {
    Raster lum, dop, aop;
    std::array<double, 3> tint{1.0, 1.0, 1.0};

    explicit StokesScene(std::size_t n) : lum(n, n), dop(n, n), aop(n, n) {}

    PolarCube build() const {
        std::array<Raster, 3> s0, d{dop, dop, dop}, a{aop, aop, aop};
        for (std::size_t c = 0; c < 3; ++c) {
            s0[c] = lum;
            for (std::size_t i = 0; i < lum.size(); ++i) s0[c][i] = std::clamp(lum[i] * tint[c], 0.0, 1.0);
        }
        return synthesize_from_stokes(s0, d, a);
    }
};

double wrap_aop(double a) {
    while (a > kPi / 2) a -= kPi;
    while (a <= -kPi / 2) a += kPi;
    return a;
}

std::array<double, 3> random_tint(Rng& rng) {
    return {rng.uniform(0.75, 1.0), rng.uniform(0.85, 1.0), rng.uniform(0.7, 1.0)};
}

/// Sum of a few random low-frequency cosines, normalized to [0, 1].
Raster smooth_field(std::size_t n, Rng& rng, int terms, double max_freq) {
    Raster f(n, n);
    std::vector<std::array<double, 4>> waves;
    for (int t = 0; t < terms; ++t) {
        waves.push_back({rng.uniform(-max_freq, max_freq), rng.uniform(-max_freq, max_freq), rng.uniform(0, 2 * kPi),
                         rng.uniform(0.5, 1.0)});
    }
    double lo = 1e300, hi = -1e300;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            double v = 0.0;
            for (const auto& w : waves) {
                v += w[3] * std::cos(2 * kPi * (w[0] * static_cast<double>(r) + w[1] * static_cast<double>(c)) /
                                         static_cast<double>(n) + w[2]);
            }
            f(r, c) = v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = hi > lo ? (f[i] - lo) / (hi - lo) : 0.5;
    return f;
}

/// Band-summed white noise with equal energy per octave (roughly 1/f, like natural images), mapped to [0, 1].
Raster fractal_field(std::size_t n, Rng& rng, double finest, double coarsest) {
    Raster f(n, n);
    for (double sigma = finest; sigma <= coarsest * 1.0001; sigma *= 2.0) {
        Raster noise(n, n);
        for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = rng.uniform(-1.0, 1.0);
        const Raster band = gaussian_blur(noise, sigma);
        double ss = 0.0;
        for (std::size_t i = 0; i < band.size(); ++i) ss += band[i] * band[i];
        const double scale = ss > 0.0 ? 1.0 / std::sqrt(ss / static_cast<double>(band.size())) : 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) f[i] += scale * band[i];
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) ss += f[i] * f[i];
    const double sd = std::sqrt(ss / static_cast<double>(f.size()));
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::clamp(0.5 + f[i] / (5.0 * sd), 0.0, 1.0);
    return f;
}

PolarCube constant_scene(std::size_t n) { return PolarCube(n, n, 0.5); }

PolarCube malus_ramp(std::size_t n) {
    StokesScene s(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            s.lum(r, c) = 0.8;
            s.dop(r, c) = static_cast<double>(c) / static_cast<double>(n - 1);
            s.aop(r, c) = -kPi / 2 + kPi * (static_cast<double>(r) + 0.5) / static_cast<double>(n);
        }
    }
    return s.build();
}

/// Smooth textured intensity with one global polarization state.
PolarCube constant_dop(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    StokesScene s(n);
    s.tint = random_tint(rng);
    const Raster tex = smooth_field(n, rng, 6, 10.0);
    const double dop = rng.uniform(0.2, 0.6), aop = rng.uniform(-kPi / 2, kPi / 2);
    for (std::size_t i = 0; i < tex.size(); ++i) {
        s.lum[i] = 0.1 + 0.8 * tex[i];
        s.dop[i] = dop;
        s.aop[i] = wrap_aop(aop);
    }
    return s.build();
}

/// Overlapping rectangles and disks, each a piecewise-constant intensity and polarization state.
PolarCube edge_chart(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    StokesScene s(n);
    s.tint = random_tint(rng);
    const double bg_lum = rng.uniform(0.2, 0.5), bg_dop = rng.uniform(0.05, 0.3), bg_aop = rng.uniform(-1.5, 1.5);
    for (std::size_t i = 0; i < s.lum.size(); ++i) {
        s.lum[i] = bg_lum;
        s.dop[i] = bg_dop;
        s.aop[i] = bg_aop;
    }
    const auto nd = static_cast<double>(n);
    for (int k = 0; k < 14; ++k) {
        const double lum = rng.uniform(0.1, 0.95), dop = rng.uniform(0.0, 0.9), aop = rng.uniform(-1.5, 1.5);
        const double cr = rng.uniform(0, nd), cc = rng.uniform(0, nd);
        const double hr = rng.uniform(0.05, 0.25) * nd, hc = rng.uniform(0.05, 0.25) * nd;
        const bool disk = rng.uniform() < 0.5;
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                const double dr = (static_cast<double>(r) - cr) / hr, dc = (static_cast<double>(c) - cc) / hc;
                const bool inside = disk ? dr * dr + dc * dc <= 1.0 : std::abs(dr) <= 1.0 && std::abs(dc) <= 1.0;
                if (!inside) continue;
                s.lum(r, c) = lum;
                s.dop(r, c) = dop;
                s.aop(r, c) = aop;
            }
        }
    }
    return s.build();
}

/// Thin strokes on a plain background, like printed text.
PolarCube text_chart(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    StokesScene s(n);
    s.tint = random_tint(rng);
    const double bg_lum = rng.uniform(0.6, 0.9), ink_lum = rng.uniform(0.05, 0.25);
    const double bg_dop = rng.uniform(0.05, 0.2), ink_dop = rng.uniform(0.3, 0.7);
    const double bg_aop = rng.uniform(-1.5, 1.5), ink_aop = wrap_aop(bg_aop + rng.uniform(0.6, 1.2));
    for (std::size_t i = 0; i < s.lum.size(); ++i) {
        s.lum[i] = bg_lum;
        s.dop[i] = bg_dop;
        s.aop[i] = bg_aop;
    }
    const std::size_t glyph = 12;
    for (std::size_t gr = 2; gr + glyph < n; gr += glyph + 4) {
        for (std::size_t gc = 2; gc + glyph < n; gc += glyph - 2) {
            if (rng.uniform() < 0.15) continue;  // word gap
            const int strokes = 2 + static_cast<int>(rng.index(3));
            for (int k = 0; k < strokes; ++k) {
                const bool vertical = rng.uniform() < 0.5;
                const std::size_t pos = rng.index(glyph - 2);
                const std::size_t width = 1 + rng.index(2);
                const std::size_t from = rng.index(glyph / 2), to = glyph / 2 + rng.index(glyph / 2);
                for (std::size_t t = from; t < to; ++t) {
                    for (std::size_t wdt = 0; wdt < width; ++wdt) {
                        const std::size_t r = gr + (vertical ? t : pos + wdt);
                        const std::size_t c = gc + (vertical ? pos + wdt : t);
                        if (r >= n || c >= n) continue;
                        s.lum(r, c) = ink_lum;
                        s.dop(r, c) = ink_dop;
                        s.aop(r, c) = ink_aop;
                    }
                }
            }
        }
    }
    return s.build();
}

/// Smooth random intensity, DOP and AOP fields.
PolarCube smooth_field_scene(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    StokesScene s(n);
    s.tint = random_tint(rng);
    const Raster lum = smooth_field(n, rng, 5, 6.0);
    const Raster dop = smooth_field(n, rng, 4, 3.0);
    const Raster aop = smooth_field(n, rng, 3, 2.0);
    const double aop_base = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < lum.size(); ++i) {
        s.lum[i] = 0.08 + 0.85 * lum[i];
        s.dop[i] = 0.05 + 0.6 * dop[i];
        s.aop[i] = wrap_aop(aop_base + 1.2 * (aop[i] - 0.5));
    }
    return s.build();
}

/// Illumination falling off from bright to very dark across the frame over a textured, polarized surface.
PolarCube dark_gradient(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    StokesScene s(n);
    s.tint = random_tint(rng);
    const Raster tex = smooth_field(n, rng, 6, 12.0);
    const Raster dop = smooth_field(n, rng, 3, 2.0);
    const double angle = rng.uniform(0, 2 * kPi), aop = rng.uniform(-1.5, 1.5);
    const double ca = std::cos(angle), sa = std::sin(angle);
    const auto nd = static_cast<double>(n - 1);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            const double u = 0.5 + 0.5 * (ca * (2.0 * static_cast<double>(c) / nd - 1.0) +
                                          sa * (2.0 * static_cast<double>(r) / nd - 1.0)) / std::numbers::sqrt2;
            const double illum = 0.04 + 0.9 * u * u;
            s.lum(r, c) = illum * (0.6 + 0.4 * tex(r, c));
            s.dop(r, c) = 0.15 + 0.5 * dop(r, c);
            s.aop(r, c) = aop;
        }
    }
    return s.build();
}

/// Independent fractal textures in intensity, DOP and AOP.
PolarCube fractal_scene(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    StokesScene s(n);
    s.tint = random_tint(rng);
    const Raster lum = fractal_field(n, rng, 1.0, 32.0);
    const Raster dop = fractal_field(n, rng, 1.0, 32.0);
    const Raster aop = fractal_field(n, rng, 1.0, 32.0);
    const double aop_base = rng.uniform(-1.5, 1.5);
    for (std::size_t i = 0; i < lum.size(); ++i) {
        s.lum[i] = 0.03 + 0.95 * lum[i];
        s.dop[i] = 0.02 + 0.8 * dop[i];
        s.aop[i] = wrap_aop(aop_base + 2.4 * (aop[i] - 0.5));
    }
    return s.build();
}

/// Lit dielectric spheres: diffuse polarization with AOP along the surface normal azimuth and DOP rising
/// toward the limb (refractive index 1.5).
PolarCube spheres(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    StokesScene s(n);
    s.tint = random_tint(rng);
    const double bg = rng.uniform(0.05, 0.2);
    for (std::size_t i = 0; i < s.lum.size(); ++i) {
        s.lum[i] = bg;
        s.dop[i] = 0.02;
        s.aop[i] = 0.0;
    }
    const double light_az = rng.uniform(0, 2 * kPi), light_el = rng.uniform(0.6, 1.3);
    const double lx = std::cos(light_el) * std::cos(light_az), ly = std::cos(light_el) * std::sin(light_az),
                 lz = std::sin(light_el);
    const double eta = 1.5;
    const auto nd = static_cast<double>(n);
    for (int k = 0; k < 9; ++k) {
        const double cr = rng.uniform(0, nd), cc = rng.uniform(0, nd), rad = rng.uniform(0.06, 0.2) * nd;
        const double albedo = rng.uniform(0.4, 1.0);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                const double dy = (static_cast<double>(r) + 0.5 - cr) / rad, dx = (static_cast<double>(c) + 0.5 - cc) / rad;
                const double rho2 = dx * dx + dy * dy;
                if (rho2 >= 1.0) continue;
                const double nz = std::sqrt(1.0 - rho2);
                const double sin_t = std::sqrt(rho2);
                const double st2 = sin_t * sin_t;
                // Diffuse degree of polarization for zenith angle theta.
                const double e = eta - 1.0 / eta;
                const double dop = e * e * st2 /
                                   (2.0 + 2.0 * eta * eta - (eta + 1.0 / eta) * (eta + 1.0 / eta) * st2 +
                                    4.0 * nz * std::sqrt(eta * eta - st2));
                const double shade = std::max(0.0, dx * lx + dy * ly + nz * lz);
                s.lum(r, c) = albedo * (0.08 + 0.9 * shade);
                s.dop(r, c) = std::clamp(dop, 0.0, 1.0);
                s.aop(r, c) = wrap_aop(std::atan2(dy, dx));
            }
        }
    }
    return s.build();
}

std::string sanitize(const std::string& s) {
    std::string out;
    for (char ch : s) out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '@' || ch == '.') ? ch : '_';
    return out;
}

}  // namespace

std::vector<std::string> procedural_generators() {
    return {"constant",   "malus-ramp",   "constant-dop",  "edge-chart", "text-chart",
            "smooth-field", "dark-gradient", "fractal",      "spheres"};
}

std::vector<std::string> default_suite() {
    return {"fractal@1",    "fractal@2",    "spheres@1",       "spheres@2",       "edge-chart@1",
            "edge-chart@2", "text-chart@1", "text-chart@2", "dark-gradient@1", "dark-gradient@2"};
}

PolarCube generate_scene(const std::string& generator, std::size_t size, std::uint64_t seed) {
    if (size < 4 || size % 4 != 0) fail(ErrorKind::Config, "scene size must be a positive multiple of 4");
    if (generator == "constant") return constant_scene(size);
    if (generator == "malus-ramp") return malus_ramp(size);
    if (generator == "constant-dop") return constant_dop(size, seed);
    if (generator == "edge-chart") return edge_chart(size, seed);
    if (generator == "text-chart") return text_chart(size, seed);
    if (generator == "smooth-field") return smooth_field_scene(size, seed);
    if (generator == "dark-gradient") return dark_gradient(size, seed);
    if (generator == "fractal") return fractal_scene(size, seed);
    if (generator == "spheres") return spheres(size, seed);
    fail(ErrorKind::Input, "unknown scene generator '" + generator + "'");
}

SceneDescriptor parse_scene(const std::string& spec, std::size_t size) {
    SceneDescriptor d;
    d.size = size;
    if (spec.empty()) fail(ErrorKind::Input, "empty scene id");
    std::error_code ec;
    if (fs::is_directory(spec, ec)) {
        d.directory = spec;
        d.id = sanitize(fs::path(spec).lexically_normal().filename().string());
        if (d.id.empty()) d.id = sanitize(fs::path(spec).lexically_normal().parent_path().filename().string());
        return d;
    }
    const auto at = spec.find('@');
    d.generator = spec.substr(0, at);
    if (at != std::string::npos) {
        try {
            std::size_t used = 0;
            d.seed = std::stoull(spec.substr(at + 1), &used);
            if (used != spec.size() - at - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            fail(ErrorKind::Input, "scene '" + spec + "': seed must be an unsigned integer");
        }
    }
    const auto gens = procedural_generators();
    if (std::find(gens.begin(), gens.end(), d.generator) == gens.end()) {
        fail(ErrorKind::Input, "scene '" + spec + "' is neither a directory nor a known generator");
    }
    d.id = sanitize(spec);
    return d;
}

PolarCube ingest_scene(const SceneDescriptor& desc) {
    if (desc.directory.empty()) return generate_scene(desc.generator, desc.size, desc.seed);

    const fs::path root(desc.directory);
    static constexpr const char* kDirs[4] = {"000", "045", "090", "135"};
    PolarCube cube;
    for (Angle a : kAngles) {
        const fs::path dir = root / kDirs[static_cast<int>(a)];
        if (!fs::is_directory(dir)) {
            fail(ErrorKind::Input, "scene '" + desc.directory + "': missing angle directory " + kDirs[static_cast<int>(a)]);
        }
        std::array<Raster, 3> rgb;
        if (fs::exists(dir / "R.png") || fs::exists(dir / "G.png") || fs::exists(dir / "B.png")) {
            for (Color c : kColors) {
                const fs::path file = dir / (std::string(1, color_code(c)) + ".png");
                if (!fs::exists(file)) fail(ErrorKind::Input, "scene: missing " + file.string());
                const png::Image img = png::read(file.string());
                Raster r(img.height, img.width);
                for (std::size_t i = 0; i < r.size(); ++i) r[i] = img.data[i * img.channels];
                rgb[static_cast<std::size_t>(c)] = std::move(r);
            }
        } else {
            std::vector<fs::path> pngs;
            for (const auto& e : fs::directory_iterator(dir)) {
                if (e.path().extension() == ".png") pngs.push_back(e.path());
            }
            std::sort(pngs.begin(), pngs.end());
            if (pngs.size() != 1) {
                fail(ErrorKind::Input, "scene: " + dir.string() + " must hold R/G/B.png or exactly one RGB png");
            }
            const png::Image img = png::read(pngs[0].string());
            if (img.channels != 3) fail(ErrorKind::Input, "scene: " + pngs[0].string() + " is not a 3-channel image");
            for (std::size_t c = 0; c < 3; ++c) {
                Raster r(img.height, img.width);
                for (std::size_t i = 0; i < r.size(); ++i) r[i] = img.data[i * 3 + c];
                rgb[c] = std::move(r);
            }
        }
        if (a == Angle::Deg0) cube = PolarCube(rgb[0].height(), rgb[0].width());
        for (Color c : kColors) {
            Raster& r = rgb[static_cast<std::size_t>(c)];
            if (r.height() != cube.height() || r.width() != cube.width()) {
                fail(ErrorKind::Input, "scene '" + desc.directory + "': image dimensions differ between planes");
            }
            cube.plane(a, c) = std::move(r);
        }
    }
    if (cube.height() % 4 != 0 || cube.width() % 4 != 0) {
        fail(ErrorKind::Input, "scene '" + desc.directory + "': dimensions must be divisible by 4");
    }
    return cube;
}

}  // namespace cpdm
