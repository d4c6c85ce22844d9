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
#include "cpdm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "cpdm/error.hpp"

namespace cpdm {

namespace {

double psnr_from_mse(double mse, double peak) {
    if (mse == 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

double wrap_deg(double d) noexcept {
    d = std::abs(d);
    return std::min(d, 180.0 - d);
}

void check_angle_range(const Raster& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!(r[i] > -90.0 - 1e-9 && r[i] <= 90.0 + 1e-9)) {
            fail(ErrorKind::Domain, "angle " + std::to_string(r[i]) + " outside (-90, 90] degrees");
        }
    }
}

}  // namespace

double psnr(std::span<const Raster* const> a, std::span<const Raster* const> b, double peak) {
    if (!(peak > 0.0)) fail(ErrorKind::Domain, "psnr: peak must be positive");
    if (a.size() != b.size() || a.empty()) fail(ErrorKind::Structural, "psnr: raster groups differ");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (!a[k]->same_shape(*b[k])) fail(ErrorKind::Structural, "psnr: dimensions differ");
        for (std::size_t i = 0; i < a[k]->size(); ++i) {
            const double d = (*a[k])[i] - (*b[k])[i];
            sum += d * d;
        }
        n += a[k]->size();
    }
    if (n == 0) fail(ErrorKind::Structural, "psnr: empty rasters");
    return psnr_from_mse(sum / static_cast<double>(n), peak);
}

double psnr(const Raster& a, const Raster& b, double peak) {
    const Raster* pa[] = {&a};
    const Raster* pb[] = {&b};
    return psnr(pa, pb, peak);
}

double psnr_angle_deg(const Raster& a, const Raster& b) {
    if (!a.same_shape(b) || a.empty()) fail(ErrorKind::Structural, "psnr_angle_deg: dimensions differ");
    check_angle_range(a);
    check_angle_range(b);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = wrap_deg(a[i] - b[i]);
        sum += d * d;
    }
    return psnr_from_mse(sum / static_cast<double>(a.size()), 90.0);
}

namespace {

/// Separable Gaussian filter evaluated only where the full window fits ("valid" region).
Raster filter_valid(const Raster& src, const std::vector<double>& k) {
    const std::size_t n = k.size();
    const std::size_t oh = src.height() - n + 1, ow = src.width() - n + 1;
    Raster tmp(src.height(), ow);
    for (std::size_t r = 0; r < src.height(); ++r) {
        for (std::size_t c = 0; c < ow; ++c) {
            double acc = 0.0;
            for (std::size_t t = 0; t < n; ++t) acc += k[t] * src(r, c + t);
            tmp(r, c) = acc;
        }
    }
    Raster out(oh, ow);
    for (std::size_t r = 0; r < oh; ++r) {
        for (std::size_t c = 0; c < ow; ++c) {
            double acc = 0.0;
            for (std::size_t t = 0; t < n; ++t) acc += k[t] * tmp(r + t, c);
            out(r, c) = acc;
        }
    }
    return out;
}

}  // namespace

double ssim(const Raster& a, const Raster& b, const SsimParams& p) {
    if (!a.same_shape(b)) fail(ErrorKind::Structural, "ssim: dimensions differ");
    if (p.window % 2 == 0 || p.window == 0) fail(ErrorKind::Config, "ssim: window must be odd");
    if (a.height() < p.window || a.width() < p.window) {
        fail(ErrorKind::Structural, "ssim: image smaller than the " + std::to_string(p.window) + "px window");
    }
    std::vector<double> k(p.window);
    const double mid = static_cast<double>(p.window / 2);
    double ksum = 0.0;
    for (std::size_t i = 0; i < p.window; ++i) {
        const double x = static_cast<double>(i) - mid;
        k[i] = std::exp(-0.5 * x * x / (p.sigma * p.sigma));
        ksum += k[i];
    }
    for (double& v : k) v /= ksum;

    Raster aa(a.height(), a.width()), bb(a.height(), a.width()), ab(a.height(), a.width());
    for (std::size_t i = 0; i < a.size(); ++i) {
        aa[i] = a[i] * a[i];
        bb[i] = b[i] * b[i];
        ab[i] = a[i] * b[i];
    }
    const Raster mu_a = filter_valid(a, k), mu_b = filter_valid(b, k);
    const Raster e_aa = filter_valid(aa, k), e_bb = filter_valid(bb, k), e_ab = filter_valid(ab, k);
    const double c1 = (p.k1 * p.dynamic_range) * (p.k1 * p.dynamic_range);
    const double c2 = (p.k2 * p.dynamic_range) * (p.k2 * p.dynamic_range);
    double sum = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i], mb = mu_b[i];
        const double va = e_aa[i] - ma * ma, vb = e_bb[i] - mb * mb, cov = e_ab[i] - ma * mb;
        sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    return sum / static_cast<double>(mu_a.size());
}

double mae_aop(const Raster& a_deg, const Raster& b_deg) {
    if (!a_deg.same_shape(b_deg) || a_deg.empty()) fail(ErrorKind::Structural, "mae_aop: dimensions differ");
    check_angle_range(a_deg);
    check_angle_range(b_deg);
    double sum = 0.0;
    for (std::size_t i = 0; i < a_deg.size(); ++i) sum += wrap_deg(a_deg[i] - b_deg[i]);
    return sum / static_cast<double>(a_deg.size());
}

Raster radians_to_degrees(const Raster& r) {
    Raster out(r.height(), r.width());
    for (std::size_t i = 0; i < r.size(); ++i) out[i] = r[i] * (180.0 / std::numbers::pi);
    return out;
}

MetricsReport full_report(const PolarCube& recon, const PolarCube& gt, const std::string& method,
                          const std::string& scene, const std::string& config_hash) {
    recon.check_consistent();
    gt.check_consistent();
    if (!recon.same_shape(gt)) fail(ErrorKind::Structural, "full_report: dimensions differ");
    MetricsReport m;
    m.method = method;
    m.scene = scene;
    m.config_hash = config_hash;

    double psnr_sum = 0.0, ssim_sum = 0.0;
    for (Angle a : kAngles) {
        const Raster* ra[] = {&recon.plane(a, Color::R), &recon.plane(a, Color::G), &recon.plane(a, Color::B)};
        const Raster* rb[] = {&gt.plane(a, Color::R), &gt.plane(a, Color::G), &gt.plane(a, Color::B)};
        psnr_sum += psnr(ra, rb, 1.0);
        for (std::size_t c = 0; c < 3; ++c) ssim_sum += ssim(*ra[c], *rb[c]);
    }
    m.psnr_mean = psnr_sum / 4.0;
    m.ssim_mean = ssim_sum / 12.0;

    const StokesMap sr = compute_stokes(recon), sg = compute_stokes(gt);
    const Raster* s0r[] = {&sr.s0[0], &sr.s0[1], &sr.s0[2]};
    const Raster* s0g[] = {&sg.s0[0], &sg.s0[1], &sg.s0[2]};
    m.psnr_s0 = psnr(s0r, s0g, 1.0);
    m.ssim_s0 = (ssim(sr.s0[0], sg.s0[0]) + ssim(sr.s0[1], sg.s0[1]) + ssim(sr.s0[2], sg.s0[2])) / 3.0;

    const Raster dop_r = sr.mean_dop(), dop_g = sg.mean_dop();
    m.psnr_dop = psnr(dop_r, dop_g, 1.0);
    m.ssim_dop = ssim(dop_r, dop_g);

    const Raster aop_r = radians_to_degrees(sr.mean_aop()), aop_g = radians_to_degrees(sg.mean_aop());
    m.psnr_aop = psnr_angle_deg(aop_r, aop_g);
    m.mae_deg = mae_aop(aop_r, aop_g);
    return m;
}

std::vector<std::string> MetricsReport::csv_header() {
    return {"scene", "method", "psnr_mean", "psnr_s0", "psnr_dop", "mae_deg",
            "ssim_mean", "ssim_s0", "ssim_dop", "psnr_aop", "config_hash"};
}

std::vector<std::string> MetricsReport::csv_row() const {
    const auto f = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.4f", v);
        return std::string(buf);
    };
    return {scene, method, f(psnr_mean), f(psnr_s0), f(psnr_dop), f(mae_deg),
            f(ssim_mean), f(ssim_s0), f(ssim_dop), f(psnr_aop), config_hash};
}

}  // namespace cpdm
