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
#include "cpdm/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "cpdm/cpfa.hpp"
#include "cpdm/demosaic.hpp"
#include "cpdm/error.hpp"
#include "cpdm/special.hpp"

namespace cpdm {

const char* to_string(UncertaintyKind kind) noexcept {
    switch (kind) {
        case UncertaintyKind::Intensity: return "intensity";
        case UncertaintyKind::S0: return "s0";
        case UncertaintyKind::Polarization: return "polarization";
    }
    return "unknown";
}

UncertaintyKind parse_uncertainty_kind(const std::string& name) {
    if (name == "intensity") return UncertaintyKind::Intensity;
    if (name == "s0") return UncertaintyKind::S0;
    if (name == "polarization") return UncertaintyKind::Polarization;
    fail(ErrorKind::Config, "unknown uncertainty kind '" + name + "'");
}

const char* to_string(NllVariant v) noexcept { return v == NllVariant::Paper2s ? "paper-2s" : "direct-s"; }

NllVariant parse_nll_variant(const std::string& name) {
    if (name == "paper-2s") return NllVariant::Paper2s;
    if (name == "direct-s") return NllVariant::DirectS;
    fail(ErrorKind::Config, "unknown nll variant '" + name + "' (expected paper-2s or direct-s)");
}

namespace {

double log_coefficient(NllVariant v) noexcept { return v == NllVariant::Paper2s ? 2.0 : 1.0; }

void fill_log(UncertaintyMap& m) {
    m.s = Raster(m.eta_p.height(), m.eta_p.width());
    for (std::size_t i = 0; i < m.eta_p.size(); ++i) m.s[i] = std::log(m.eta_p[i]);
}

void check_rice(const RiceParams& p) {
    if (!(p.sigma > 0.0)) fail(ErrorKind::Domain, "rice: sigma must be positive");
    if (!(p.nu >= 0.0)) fail(ErrorKind::Domain, "rice: nu must be non-negative");
}

/// Integrates the Rice density over [a, b] split at breakpoints one sigma apart around the mode.
double rice_mass(const RiceParams& p, double a, double b, const std::function<double(double)>& f) {
    if (b <= a) return 0.0;
    std::vector<double> cuts{a};
    for (int k = -40; k <= 40; ++k) {
        const double x = p.nu + k * p.sigma;
        if (x > a && x < b) cuts.push_back(x);
    }
    cuts.push_back(b);
    double total = 0.0;
    for (std::size_t i = 1; i < cuts.size(); ++i) total += special::integrate(f, cuts[i - 1], cuts[i], 1e-15, 1e-12);
    return total;
}

double rice_upper(const RiceParams& p) { return p.nu + 40.0 * p.sigma; }

}  // namespace

UncertaintyMap propagate_eta_to_eta_p(const Raster& eta, const Raster& s0, double eps) {
    if (!eta.same_shape(s0)) fail(ErrorKind::Structural, "propagate_eta_to_eta_p: eta and s0 dimensions differ");
    if (!(eps > 0.0)) fail(ErrorKind::Domain, "propagate_eta_to_eta_p: eps must be positive");
    UncertaintyMap m;
    m.kind = UncertaintyKind::Polarization;
    m.eta = eta;
    m.eta_p = Raster(eta.height(), eta.width());
    m.floored = Raster(eta.height(), eta.width());
    for (std::size_t i = 0; i < eta.size(); ++i) {
        if (!(eta[i] >= 0.0)) fail(ErrorKind::Domain, "propagate_eta_to_eta_p: eta must be non-negative");
        if (!std::isfinite(s0[i])) fail(ErrorKind::Domain, "propagate_eta_to_eta_p: s0 must be finite");
        const double v = std::numbers::sqrt2 * eta[i] / std::max(s0[i], eps);
        if (v < kEtaPFloor) {
            m.eta_p[i] = kEtaPFloor;
            m.floored[i] = 1.0;
        } else {
            m.eta_p[i] = v;
        }
    }
    fill_log(m);
    return m;
}

double rice_log_pdf(double phi, const RiceParams& p) {
    check_rice(p);
    if (!(phi >= 0.0)) fail(ErrorKind::Domain, "rice_pdf: phi must be non-negative");
    if (phi == 0.0) return -std::numeric_limits<double>::infinity();
    const double var = p.sigma * p.sigma;
    const double d = phi - p.nu;
    // exp(-(phi^2 + nu^2) / 2 var) I0(z) = exp(-(phi - nu)^2 / 2 var) * exp(-z) I0(z)
    const double z = phi * p.nu / var;
    return std::log(phi / var) - d * d / (2.0 * var) + std::log(special::bessel_i0e(z));
}

double rice_pdf(double phi, const RiceParams& p) {
    const double lp = rice_log_pdf(phi, p);
    return std::exp(lp);
}

double rice_pdf_approx(double phi, const RiceParams& p) {
    if (!(p.sigma > 0.0)) fail(ErrorKind::Domain, "rice_pdf_approx: sigma must be positive");
    if (!(phi > 0.0)) fail(ErrorKind::Domain, "rice_pdf_approx: phi must be positive");
    if (!(p.nu > 0.0)) fail(ErrorKind::Domain, "rice_pdf_approx: nu must be positive");
    const double var = p.sigma * p.sigma;
    const double d = phi - p.nu;
    return std::sqrt(phi / (2.0 * std::numbers::pi * p.nu * var)) * std::exp(-d * d / (2.0 * var));
}

double rice_cdf(double phi, const RiceParams& p) {
    check_rice(p);
    if (phi <= 0.0) return 0.0;
    const auto f = [&p](double x) { return x <= 0.0 ? 0.0 : rice_pdf(x, p); };
    return std::min(1.0, rice_mass(p, 0.0, phi, f));
}

RiceMoments rice_moments(const RiceParams& p) {
    check_rice(p);
    const double hi = rice_upper(p);
    const double mean = rice_mass(p, 0.0, hi, [&p](double x) { return x <= 0.0 ? 0.0 : x * rice_pdf(x, p); });
    const double var = rice_mass(p, 0.0, hi, [&p, mean](double x) {
        return x <= 0.0 ? 0.0 : (x - mean) * (x - mean) * rice_pdf(x, p);
    });
    return {mean, std::sqrt(var)};
}

double nll_pu_pixel(double phi, double phi_tilde, double s, NllVariant v) noexcept {
    const double r = phi_tilde - phi;
    return 0.5 * (std::log(phi_tilde) - std::log(phi)) + log_coefficient(v) * s + 0.5 * std::exp(-2.0 * s) * r * r;
}

namespace {

void check_nll_inputs(const Raster& phi, const Raster& phi_tilde, const Raster& s) {
    if (!phi.same_shape(phi_tilde) || !phi.same_shape(s)) fail(ErrorKind::Structural, "nll_pu: dimensions differ");
}

double guard(double v, bool& hit) {
    if (!std::isfinite(v)) fail(ErrorKind::Domain, "nll_pu: non-finite DOP value");
    if (v < kLogEps) {
        hit = true;
        return kLogEps;
    }
    return v;
}

}  // namespace

NllResult nll_pu(const Raster& phi, const Raster& phi_tilde, const Raster& s, NllVariant v) {
    check_nll_inputs(phi, phi_tilde, s);
    NllResult out;
    out.per_pixel = Raster(phi.height(), phi.width());
    out.guarded = Raster(phi.height(), phi.width());
    double sum = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        bool hit = false;
        const double a = guard(phi[i], hit);
        const double b = guard(phi_tilde[i], hit);
        if (!std::isfinite(s[i])) fail(ErrorKind::Domain, "nll_pu: non-finite log uncertainty");
        out.per_pixel[i] = nll_pu_pixel(a, b, s[i], v);
        out.guarded[i] = hit ? 1.0 : 0.0;
        sum += out.per_pixel[i];
    }
    out.loss = phi.empty() ? 0.0 : sum / static_cast<double>(phi.size());
    return out;
}

NllGradient nll_pu_grad(const Raster& phi, const Raster& phi_tilde, const Raster& s, NllVariant v) {
    check_nll_inputs(phi, phi_tilde, s);
    NllGradient g{Raster(phi.height(), phi.width()), Raster(phi.height(), phi.width())};
    const double coef = log_coefficient(v);
    for (std::size_t i = 0; i < phi.size(); ++i) {
        bool hit = false;
        const double a = guard(phi[i], hit);
        const double b = guard(phi_tilde[i], hit);
        const double w = std::exp(-2.0 * s[i]);
        const double r = b - a;
        g.d_phi_tilde[i] = 0.5 / b + w * r;
        g.d_s[i] = coef - w * r * r;
    }
    return g;
}

namespace {

EtaEstimate scale_from_sum(double sumsq, std::size_t n, double divisor_per_sample) {
    if (n == 0 || sumsq == 0.0) return {kEtaPFloor, true};
    const double v = std::sqrt(sumsq / (divisor_per_sample * static_cast<double>(n)));
    if (v < kEtaPFloor) return {kEtaPFloor, true};
    return {v, false};
}

double sum_squares(std::span<const double> r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return s;
}

}  // namespace

EtaEstimate mle_eta_p(std::span<const double> residuals, NllVariant v) {
    // d/ds sum[c s + exp(-2s) r^2 / 2] = c N - exp(-2s) sum r^2 = 0
    return scale_from_sum(sum_squares(residuals), residuals.size(), log_coefficient(v));
}

EtaEstimate mle_gaussian_scale(std::span<const double> residuals) {
    return scale_from_sum(sum_squares(residuals), residuals.size(), 1.0);
}

namespace {

/// Window sums of a non-negative raster, truncated at the image border. Also returns the pixel counts.
std::pair<Raster, Raster> box_sum(const Raster& q, std::size_t window) {
    const auto h = static_cast<std::ptrdiff_t>(q.height());
    const auto w = static_cast<std::ptrdiff_t>(q.width());
    const auto rad = static_cast<std::ptrdiff_t>(window / 2);
    Raster rows(q.height(), q.width()), out(q.height(), q.width()), count(q.height(), q.width());
    for (std::ptrdiff_t r = 0; r < h; ++r) {
        for (std::ptrdiff_t c = 0; c < w; ++c) {
            double acc = 0.0;
            for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(0, c - rad); k <= std::min(w - 1, c + rad); ++k) {
                acc += q(static_cast<std::size_t>(r), static_cast<std::size_t>(k));
            }
            rows(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc;
        }
    }
    for (std::ptrdiff_t r = 0; r < h; ++r) {
        const std::ptrdiff_t r0 = std::max<std::ptrdiff_t>(0, r - rad), r1 = std::min(h - 1, r + rad);
        for (std::ptrdiff_t c = 0; c < w; ++c) {
            double acc = 0.0;
            for (std::ptrdiff_t k = r0; k <= r1; ++k) acc += rows(static_cast<std::size_t>(k), static_cast<std::size_t>(c));
            out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc;
            const std::ptrdiff_t c0 = std::max<std::ptrdiff_t>(0, c - rad), c1 = std::min(w - 1, c + rad);
            count(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = static_cast<double>((r1 - r0 + 1) * (c1 - c0 + 1));
        }
    }
    return {out, count};
}

Raster mean_over_colors(const std::array<Raster, 3>& r) {
    Raster out(r[0].height(), r[0].width());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (r[0][i] + r[1][i] + r[2][i]) / 3.0;
    return out;
}

}  // namespace

UncertaintyMap residual_uncertainty_map(const PolarCube& recon, const PolarCube& reference, UncertaintyKind kind,
                                        std::size_t window, NllVariant v, double eps) {
    recon.check_consistent();
    reference.check_consistent();
    if (!recon.same_shape(reference)) fail(ErrorKind::Structural, "residual_uncertainty_map: dimensions differ");
    if (window % 2 == 0) fail(ErrorKind::Structural, "residual_uncertainty_map: window must be odd");
    if (window > recon.height() || window > recon.width()) {
        fail(ErrorKind::Structural, "residual_uncertainty_map: window larger than image");
    }
    const std::size_t h = recon.height(), w = recon.width();
    const StokesMap sr = compute_stokes(recon, eps);

    // Per-pixel sum of squared residuals and the number of residuals it holds.
    Raster q(h, w);
    double per_pixel = 0.0;
    double divisor = 1.0;
    if (kind == UncertaintyKind::Intensity) {
        per_pixel = static_cast<double>(kPlaneCount);
        for (std::size_t p = 0; p < kPlaneCount; ++p) {
            for (std::size_t i = 0; i < h * w; ++i) {
                const double d = recon.plane(p)[i] - reference.plane(p)[i];
                q[i] += d * d;
            }
        }
    } else {
        const StokesMap sf = compute_stokes(reference, eps);
        per_pixel = 3.0;
        const auto& a = kind == UncertaintyKind::S0 ? sr.s0 : sr.dop;
        const auto& b = kind == UncertaintyKind::S0 ? sf.s0 : sf.dop;
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t i = 0; i < h * w; ++i) {
                const double d = a[c][i] - b[c][i];
                q[i] += d * d;
            }
        }
        if (kind == UncertaintyKind::Polarization) divisor = log_coefficient(v);
    }

    const auto [sums, counts] = box_sum(q, window);
    const Raster s0 = mean_over_colors(sr.s0);
    UncertaintyMap m;
    m.kind = kind;
    m.eta = Raster(h, w);
    m.eta_p = Raster(h, w);
    m.floored = Raster(h, w);
    for (std::size_t i = 0; i < h * w; ++i) {
        const auto n = static_cast<std::size_t>(counts[i] * per_pixel);
        const EtaEstimate est = scale_from_sum(sums[i], n, divisor);
        const double denom = std::max(s0[i], eps);
        if (kind == UncertaintyKind::Polarization) {
            m.eta_p[i] = est.eta_p;
            m.eta[i] = est.eta_p * denom / std::numbers::sqrt2;
            m.floored[i] = est.degenerate ? 1.0 : 0.0;
        } else {
            m.eta[i] = est.eta_p;
            const double ep = std::numbers::sqrt2 * est.eta_p / denom;
            m.eta_p[i] = std::max(ep, kEtaPFloor);
            m.floored[i] = (est.degenerate || ep < kEtaPFloor) ? 1.0 : 0.0;
        }
    }
    fill_log(m);
    return m;
}

double ks_statistic(std::span<const double> sorted, std::span<const double> cdf_at_samples) {
    const auto n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf_at_samples[i];
        d = std::max(d, std::max(static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n));
    }
    return d;
}

std::vector<double> monte_carlo_samples(const MonteCarloParams& params) {
    if (!(params.s0 > 0.0)) fail(ErrorKind::Domain, "monte_carlo_dop: s0 must be positive");
    if (!(params.dop_true >= 0.0 && params.dop_true <= 1.0)) fail(ErrorKind::Domain, "monte_carlo_dop: dop outside [0,1]");
    if (!(params.eta >= 0.0)) fail(ErrorKind::Domain, "monte_carlo_dop: eta must be non-negative");
    std::vector<double> out(params.n_samples, params.dop_true);
    if (params.eta == 0.0) return out;
    if (params.via_mosaic) {
        // Constant scene through the CPFA, sensor noise and bilinear interpolation; pixels of all three
        // colors are pooled. Neighbouring samples share mosaic noise, so they are not independent.
        const double per_side = std::ceil(std::sqrt(static_cast<double>(params.n_samples) / 3.0));
        const std::size_t side = 4 * static_cast<std::size_t>(std::ceil(per_side / 4.0));
        const Raster s0(side, side, params.s0), dop(side, side, params.dop_true), aop(side, side, params.aop_true);
        const CpfaMosaic m = add_noise(mosaic(synthesize_from_stokes(s0, dop, aop), default_layout()),
                                       {params.eta, params.seed});
        const StokesMap st = compute_stokes(interpolate_initial(split_channels(m)));
        for (std::size_t k = 0; k < params.n_samples; ++k) {
            const std::size_t c = k % 3, i = k / 3;
            const double mag = std::hypot(st.s1[c][i], st.s2[c][i]);
            out[k] = mag / (params.noisy_denominator ? std::max(st.s0[c][i], kDefaultDopEps) : params.s0);
        }
        return out;
    }
    const auto x = synthesize_pixel(params.s0, params.dop_true, params.aop_true);
    for (std::size_t k = 0; k < params.n_samples; ++k) {
        std::array<double, 4> y{};
        for (std::size_t t = 0; t < 4; ++t) y[t] = x[t] + params.eta * counter_normal(params.seed, 4 * k + t);
        const double s1 = y[0] - y[2];
        const double s2 = y[1] - y[3];
        const double den = params.noisy_denominator ? std::max(0.5 * (y[0] + y[1] + y[2] + y[3]), kDefaultDopEps)
                                                    : params.s0;
        out[k] = std::sqrt(s1 * s1 + s2 * s2) / den;
    }
    return out;
}

MonteCarloSummary monte_carlo_dop(const MonteCarloParams& params) {
    if (params.n_samples < 10000) fail(ErrorKind::Domain, "monte_carlo_dop: n_samples must be at least 10^4");
    MonteCarloSummary out;
    out.params = params;
    out.rice_scale = params.scale_override > 0.0 ? params.scale_override
                                                 : std::numbers::sqrt2 * params.eta / params.s0;
    std::vector<double> samples = monte_carlo_samples(params);
    const auto n = static_cast<double>(samples.size());

    double sum = 0.0;
    for (double v : samples) sum += v;
    out.mean = sum / n;
    double ss = 0.0;
    for (double v : samples) ss += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(ss / n);

    std::sort(samples.begin(), samples.end());
    const std::size_t bins = std::max<std::size_t>(1, params.histogram_bins);
    const double lo = samples.front(), hi = samples.back();
    out.edges.resize(bins + 1);
    out.counts.assign(bins, 0);
    for (std::size_t b = 0; b <= bins; ++b) out.edges[b] = lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins);
    for (double v : samples) {
        std::size_t b = hi > lo ? static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins)) : 0;
        ++out.counts[std::min(b, bins - 1)];
    }

    if (params.eta == 0.0 || !(out.rice_scale > 0.0)) {
        out.exact = true;
        out.ks_rice = out.ks_gauss = std::numeric_limits<double>::quiet_NaN();
        out.rice = {params.dop_true, 0.0};
        return out;
    }

    const RiceParams rp{params.dop_true, out.rice_scale};
    out.rice = rice_moments(rp);
    // Cumulative CDF: integrate the density between consecutive sorted samples.
    std::vector<double> cdf(samples.size()), gauss(samples.size());
    const auto f = [&rp](double x) { return x <= 0.0 ? 0.0 : rice_pdf(x, rp); };
    double acc = rice_cdf(samples[0], rp);
    cdf[0] = acc;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (samples[i] > samples[i - 1]) acc += special::integrate(f, samples[i - 1], samples[i], 1e-15, 1e-10, 20);
        cdf[i] = std::min(acc, 1.0);
    }
    for (std::size_t i = 0; i < samples.size(); ++i) gauss[i] = special::normal_cdf(samples[i], rp.nu, rp.sigma);
    out.ks_rice = ks_statistic(samples, cdf);
    out.ks_gauss = ks_statistic(samples, gauss);
    return out;
}

std::string MonteCarloSummary::to_json() const {
    using nlohmann::json;
    const auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json j;
    j["params"] = {{"s0", params.s0},
                   {"dop_true", params.dop_true},
                   {"aop_true", params.aop_true},
                   {"eta", params.eta},
                   {"n_samples", params.n_samples},
                   {"seed", params.seed},
                   {"noisy_denominator", params.noisy_denominator},
                   {"via_mosaic", params.via_mosaic}};
    j["rice_scale"] = rice_scale;
    j["mean"] = mean;
    j["std"] = stddev;
    j["rice_mean"] = rice.mean;
    j["rice_std"] = rice.stddev;
    j["exact_match"] = exact;
    j["ks_rice"] = num(ks_rice);
    j["ks_gauss"] = num(ks_gauss);
    j["histogram"] = {{"edges", edges}, {"counts", counts}};
    return j.dump();
}

}  // namespace cpdm
