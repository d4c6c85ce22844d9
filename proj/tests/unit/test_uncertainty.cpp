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
#include <numbers>
#include <random>

#include <doctest.h>
#include <json.hpp>

#include "cpdm/special.hpp"
#include "cpdm/uncertainty.hpp"
#include "helpers.hpp"

using namespace cpdm;
using std::numbers::pi;

namespace {

// Textbook Rice density with the unscaled Bessel function; valid while phi*nu/sigma^2 stays moderate.
double rice_reference(double phi, double nu, double sigma) {
    const double v = sigma * sigma;
    return phi / v * std::exp(-(phi * phi + nu * nu) / (2 * v)) * std::cyl_bessel_i(0.0, phi * nu / v);
}

// Closed-form Rice mean via the Laguerre function L_{1/2}.
double rice_mean_reference(double nu, double sigma) {
    const double x = -nu * nu / (2 * sigma * sigma);
    const double l = std::exp(x / 2) * ((1 - x) * std::cyl_bessel_i(0.0, -x / 2) - x * std::cyl_bessel_i(1.0, -x / 2));
    return sigma * std::sqrt(pi / 2) * l;
}

double golden_section(const std::function<double(double)>& f, double a, double b) {
    const double g = (std::sqrt(5.0) - 1) / 2;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > 1e-12) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return (a + b) / 2;
}

// Term-by-term loss, written independently of the library.
double nll_reference(double phi, double phi_tilde, double s, double coef) {
    const double t1 = 0.5 * std::log(phi_tilde) - 0.5 * std::log(phi);
    const double t2 = coef * s;
    const double t3 = 0.5 * std::exp(-2 * s) * (phi_tilde - phi) * (phi_tilde - phi);
    return t1 + t2 + t3;
}

Raster one(double v) { return Raster(1, 1, v); }

}  // namespace

TEST_CASE("propagate_eta_to_eta_p") {
    CHECK(propagate_eta_to_eta_p(one(0.01), one(1.0)).eta_p[0] == doctest::Approx(0.0141421356).epsilon(1e-9));
    CHECK(propagate_eta_to_eta_p(one(0.02), one(0.5)).eta_p[0] == doctest::Approx(0.0565685425).epsilon(1e-9));

    const UncertaintyMap zero = propagate_eta_to_eta_p(one(0.0), one(0.7));
    CHECK(zero.eta_p[0] == kEtaPFloor);
    CHECK(zero.floored[0] == 1.0);
    CHECK(zero.s[0] == doctest::Approx(std::log(kEtaPFloor)));
    CHECK(zero.kind == UncertaintyKind::Polarization);

    // Dark pixel: the denominator is eps.
    CHECK(propagate_eta_to_eta_p(one(0.01), one(0.0), 1e-3).eta_p[0] == doctest::Approx(std::sqrt(2.0) * 10.0));

    test::require_error([] { propagate_eta_to_eta_p(one(-0.1), one(1.0)); }, ErrorKind::Domain);
    test::require_error([] { propagate_eta_to_eta_p(Raster(2, 2), Raster(2, 3)); }, ErrorKind::Structural);
}

TEST_CASE("propagation scales linearly in eta and keeps s = ln eta_p") {
    std::mt19937_64 rng(1);
    const Raster eta = test::random_raster(8, 8, rng, 0.001, 0.05), s0 = test::random_raster(8, 8, rng, 0.05, 1.0);
    const UncertaintyMap a = propagate_eta_to_eta_p(eta, s0);
    Raster eta3 = eta;
    for (std::size_t i = 0; i < eta3.size(); ++i) eta3[i] *= 3.0;
    const UncertaintyMap b = propagate_eta_to_eta_p(eta3, s0);
    for (std::size_t i = 0; i < eta.size(); ++i) {
        CHECK(b.eta_p[i] == doctest::Approx(3.0 * a.eta_p[i]).epsilon(1e-14));
        CHECK(std::abs(a.s[i] - std::log(a.eta_p[i])) < 1e-12);
    }
}

TEST_CASE("rice_pdf Rayleigh case") {
    CHECK(rice_pdf(1.0, {0.0, 1.0}) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
    for (double sigma : {0.01, 0.3, 2.0}) {
        for (double phi = 0.0; phi < 6 * sigma; phi += sigma / 7) {
            const double rayleigh = phi / (sigma * sigma) * std::exp(-phi * phi / (2 * sigma * sigma));
            CHECK(std::abs(rice_pdf(phi, {0.0, sigma}) - rayleigh) <= 1e-12 * std::max(1.0, rayleigh));
        }
    }
}

TEST_CASE("rice_pdf matches the unscaled textbook formula") {
    for (auto [nu, sigma] : {std::pair{0.3, 0.2}, {0.5, 0.3}, {1.0, 0.5}, {0.1, 0.05}}) {
        for (double phi = 0.01; phi < nu + 6 * sigma; phi += sigma / 5) {
            CHECK(rice_pdf(phi, {nu, sigma}) == doctest::Approx(rice_reference(phi, nu, sigma)).epsilon(1e-11));
        }
    }
}

TEST_CASE("rice_pdf is finite for huge Bessel arguments") {
    // phi * nu / sigma^2 = 1e6 and beyond.
    const RiceParams p{0.5, 0.0005};
    const double v = rice_pdf(0.5, p);
    CHECK(std::isfinite(v));
    CHECK(v == doctest::Approx(1.0 / (p.sigma * std::sqrt(2 * pi))).epsilon(1e-5));
    CHECK(rice_pdf(0.5, {0.5, 0.01}) == doctest::Approx(39.894).epsilon(0.002));
    test::require_error([] { rice_pdf(-0.1, {0.2, 0.1}); }, ErrorKind::Domain);
    test::require_error([] { rice_pdf(0.1, {0.2, 0.0}); }, ErrorKind::Domain);
}

TEST_CASE("rice_pdf integrates to one") {
    for (auto [nu, sigma] : {std::pair{0.0, 1.0}, {0.3, 0.02}, {0.7, 0.05}, {0.02, 0.01}}) {
        const RiceParams p{nu, sigma};
        const double mass = special::integrate([&](double x) { return x <= 0 ? 0.0 : rice_pdf(x, p); }, 0.0,
                                               nu + 40 * sigma, 1e-14, 1e-12);
        CHECK(std::abs(mass - 1.0) < 1e-6);
        CHECK(rice_cdf(nu + 40 * sigma, p) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("rice_cdf against the Rayleigh closed form") {
    const double sigma = 0.02;
    for (double phi = 0.0; phi < 0.1; phi += 0.003) {
        CHECK(rice_cdf(phi, {0.0, sigma}) == doctest::Approx(1 - std::exp(-phi * phi / (2 * sigma * sigma))).epsilon(1e-9));
    }
}

TEST_CASE("rice_moments against closed forms") {
    for (auto [nu, sigma] : {std::pair{0.0, 0.0141421356}, {0.3, 0.0141421356}, {0.05, 0.02}, {0.7, 0.0282842712},
                             {0.02, 0.01}}) {
        const RiceMoments m = rice_moments({nu, sigma});
        const double mean = rice_mean_reference(nu, sigma);
        CHECK(m.mean == doctest::Approx(mean).epsilon(1e-8));
        CHECK(m.stddev == doctest::Approx(std::sqrt(2 * sigma * sigma + nu * nu - mean * mean)).epsilon(1e-6));
    }
    const double sigma = 0.01 * std::sqrt(2.0);
    CHECK(rice_moments({0.0, sigma}).mean == doctest::Approx(sigma * std::sqrt(pi / 2)).epsilon(1e-10));
}

TEST_CASE("Gaussian approximation") {
    CHECK(rice_pdf_approx(0.4, {0.4, 0.03}) == doctest::Approx(1.0 / std::sqrt(2 * pi * 0.03 * 0.03)));

    const auto max_rel_err = [](double nu, double sigma) {
        double worst = 0.0;
        for (int k = -500; k <= 500; ++k) {
            const double phi = nu + 5.0 * sigma * k / 500.0;
            if (phi <= 0.0) continue;
            const double exact = rice_pdf(phi, {nu, sigma});
            worst = std::max(worst, std::abs(rice_pdf_approx(phi, {nu, sigma}) - exact) / exact);
        }
        return worst;
    };
    CHECK(max_rel_err(0.5, 0.01) < 0.01);
    CHECK(max_rel_err(0.05, 0.05) > 0.10);

    // Total variation shrinks at large nu / sigma.
    const RiceParams p{0.5, 0.01};
    const double tv = 0.5 * special::integrate(
                                [&](double x) { return x <= 0 ? 0.0 : std::abs(rice_pdf(x, p) - rice_pdf_approx(x, p)); },
                                p.nu - 12 * p.sigma, p.nu + 12 * p.sigma, 1e-14, 1e-10);
    CHECK(tv < 1e-3);

    test::require_error([] { rice_pdf_approx(0.0, {0.2, 0.1}); }, ErrorKind::Domain);
    test::require_error([] { rice_pdf_approx(0.1, {0.0, 0.1}); }, ErrorKind::Domain);
}

TEST_CASE("nll_pu values") {
    CHECK(nll_pu_pixel(0.4, 0.4, 0.0) == 0.0);
    CHECK(nll_pu_pixel(0.5, 0.5, std::log(0.1)) == doctest::Approx(-4.6051702).epsilon(1e-8));
    CHECK(std::abs(nll_pu_pixel(0.3, 0.4, -2.0) - nll_reference(0.3, 0.4, -2.0, 2.0)) < 1e-12);
    CHECK(std::abs(nll_pu_pixel(0.3, 0.4, -2.0, NllVariant::DirectS) - nll_reference(0.3, 0.4, -2.0, 1.0)) < 1e-12);

    Raster phi(1, 2), phi_t(1, 2), s(1, 2, -1.0);
    phi[0] = 0.3;
    phi_t[0] = 0.35;
    phi[1] = 0.0;  // guarded
    phi_t[1] = 0.2;
    const NllResult r = nll_pu(phi, phi_t, s);
    CHECK(r.guarded[0] == 0.0);
    CHECK(r.guarded[1] == 1.0);
    CHECK(r.per_pixel[1] == doctest::Approx(nll_reference(kLogEps, 0.2, -1.0, 2.0)));
    CHECK(r.loss == doctest::Approx((r.per_pixel[0] + r.per_pixel[1]) / 2));
    test::require_error([&] { nll_pu(phi, Raster(1, 3), s); }, ErrorKind::Structural);
    Raster bad = phi;
    bad[0] = std::numeric_limits<double>::quiet_NaN();
    test::require_error([&] { nll_pu(bad, phi_t, s); }, ErrorKind::Domain);
}

TEST_CASE("nll_pu_grad plug-in values") {
    const NllGradient g = nll_pu_grad(one(1.0), one(1.0), one(0.0));
    CHECK(g.d_phi_tilde[0] == doctest::Approx(0.5));
    CHECK(g.d_s[0] == doctest::Approx(2.0));
    CHECK(nll_pu_grad(one(0.2), one(0.2 + std::sqrt(2.0)), one(0.0)).d_s[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("nll_pu_grad matches central finite differences") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> ud(0.05, 1.0), us(-6.0, 1.0);
    const double h = 1e-6;
    for (NllVariant v : {NllVariant::Paper2s, NllVariant::DirectS}) {
        for (int i = 0; i < 1000; ++i) {
            const double phi = ud(rng), pt = ud(rng), s = us(rng);
            const NllGradient g = nll_pu_grad(one(phi), one(pt), one(s), v);
            const double fd_pt = (nll_pu_pixel(phi, pt + h, s, v) - nll_pu_pixel(phi, pt - h, s, v)) / (2 * h);
            const double fd_s = (nll_pu_pixel(phi, pt, s + h, v) - nll_pu_pixel(phi, pt, s - h, v)) / (2 * h);
            CHECK(std::abs(g.d_phi_tilde[0] - fd_pt) <= 1e-5 * std::max(1.0, std::abs(fd_pt)));
            CHECK(std::abs(g.d_s[0] - fd_s) <= 1e-5 * std::max(1.0, std::abs(fd_s)));
        }
    }
}

TEST_CASE("mle_eta_p closed form") {
    const std::vector<double> same(10, 0.2);
    CHECK(mle_eta_p(same).eta_p == doctest::Approx(std::sqrt(0.02)).epsilon(1e-12));
    const std::vector<double> pm{0.1, -0.1};
    CHECK(mle_eta_p(pm).eta_p == doctest::Approx(0.0707107).epsilon(1e-6));
    CHECK(mle_eta_p(pm, NllVariant::DirectS).eta_p == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(mle_gaussian_scale(pm).eta_p == doctest::Approx(0.1).epsilon(1e-12));

    const std::vector<double> zeros(5, 0.0);
    const EtaEstimate z = mle_eta_p(zeros);
    CHECK(z.eta_p == kEtaPFloor);
    CHECK(z.degenerate);
    CHECK(mle_eta_p(std::vector<double>{}).degenerate);
}

TEST_CASE("mle_eta_p agrees with golden-section minimization of the summed loss") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.05, 0.9), ur(-0.2, 0.2);
    std::uniform_int_distribution<int> un(1, 60);
    for (NllVariant v : {NllVariant::Paper2s, NllVariant::DirectS}) {
        for (int set = 0; set < 100; ++set) {
            const int n = un(rng);
            std::vector<double> phi(n), pt(n), r(n);
            for (int i = 0; i < n; ++i) {
                phi[i] = u(rng);
                pt[i] = std::clamp(phi[i] + ur(rng), 0.01, 1.0);
                r[i] = pt[i] - phi[i];
            }
            const auto total = [&](double s) {
                double t = 0.0;
                for (int i = 0; i < n; ++i) t += nll_pu_pixel(phi[i], pt[i], s, v);
                return t;
            };
            const double s_star = golden_section(total, -20.0, 5.0);
            CHECK(std::abs(mle_eta_p(r, v).eta_p - std::exp(s_star)) < 1e-6);
        }
    }
}

TEST_CASE("residual_uncertainty_map basics") {
    std::mt19937_64 rng(5);
    const PolarCube recon = test::random_cube(12, 12, rng, 0.2, 0.8);

    const UncertaintyMap same = residual_uncertainty_map(recon, recon, UncertaintyKind::Polarization, 3);
    for (std::size_t i = 0; i < 144; ++i) {
        CHECK(same.eta_p[i] == kEtaPFloor);
        CHECK(same.floored[i] == 1.0);
    }

    PolarCube shifted = recon;
    for (std::size_t p = 0; p < kPlaneCount; ++p) {
        for (double& v : shifted.plane(p).values()) v += 0.1;
    }
    for (std::size_t window : {1u, 3u, 5u}) {
        const UncertaintyMap m = residual_uncertainty_map(recon, shifted, UncertaintyKind::Intensity, window);
        for (std::size_t i = 0; i < 144; ++i) CHECK(m.eta[i] == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(&m.estimate() == &m.eta);
    }
    // S0 differs by 0.2 under the offset.
    const UncertaintyMap ms = residual_uncertainty_map(recon, shifted, UncertaintyKind::S0, 3);
    for (std::size_t i = 0; i < 144; ++i) CHECK(ms.eta[i] == doctest::Approx(0.2).epsilon(1e-12));

    test::require_error([&] { residual_uncertainty_map(recon, recon, UncertaintyKind::S0, 4); }, ErrorKind::Structural);
    test::require_error([&] { residual_uncertainty_map(recon, recon, UncertaintyKind::S0, 13); }, ErrorKind::Structural);
    test::require_error([&] { residual_uncertainty_map(recon, PolarCube(12, 8), UncertaintyKind::S0, 3); },
                        ErrorKind::Structural);
}

TEST_CASE("residual_uncertainty_map polarization kind uses the loss-specific estimator") {
    // One pixel with a known DOP residual; window 1 gives the per-pixel estimator.
    PolarCube a(4, 4), b(4, 4);
    for (Color c : kColors) {
        const auto xa = synthesize_pixel(1.0, 0.3, 0.2), xb = synthesize_pixel(1.0, 0.5, 0.2);
        for (Angle ang : kAngles) {
            a.plane(ang, c) = Raster(4, 4, xa[static_cast<int>(ang)]);
            b.plane(ang, c) = Raster(4, 4, xb[static_cast<int>(ang)]);
        }
    }
    const UncertaintyMap p2 = residual_uncertainty_map(a, b, UncertaintyKind::Polarization, 1, NllVariant::Paper2s);
    const UncertaintyMap p1 = residual_uncertainty_map(a, b, UncertaintyKind::Polarization, 1, NllVariant::DirectS);
    CHECK(p2.eta_p[5] == doctest::Approx(0.2 / std::sqrt(2.0)).epsilon(1e-9));
    CHECK(p1.eta_p[5] == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(&p2.estimate() == &p2.eta_p);
}

TEST_CASE("ks_statistic against a brute-force supremum") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> x(300);
    for (double& v : x) v = u(rng) * u(rng);  // not uniform
    std::sort(x.begin(), x.end());
    std::vector<double> cdf(x.begin(), x.end());  // uniform CDF
    double brute = 0.0;
    for (double t : x) {
        // Empirical CDF just below and at t.
        const double below = static_cast<double>(std::lower_bound(x.begin(), x.end(), t) - x.begin()) / 300.0;
        const double at = static_cast<double>(std::upper_bound(x.begin(), x.end(), t) - x.begin()) / 300.0;
        brute = std::max({brute, std::abs(at - t), std::abs(below - t)});
    }
    CHECK(ks_statistic(x, cdf) == doctest::Approx(brute).epsilon(1e-12));
}

TEST_CASE("monte_carlo_dop reproduces the Rayleigh mean for unpolarized light") {
    MonteCarloParams p;
    p.dop_true = 0.0;
    p.eta = 0.01;
    const MonteCarloSummary s = monte_carlo_dop(p);
    CHECK(s.rice_scale == doctest::Approx(0.0141421356));
    CHECK(s.mean == doctest::Approx(0.017725).epsilon(0.02));
    CHECK(s.ks_rice < 0.01);
}

TEST_CASE("monte_carlo_dop follows the Rice law") {
    MonteCarloParams p;
    p.dop_true = 0.3;
    p.eta = 0.01;
    const MonteCarloSummary s = monte_carlo_dop(p);
    CHECK(s.ks_rice < 0.01);
    CHECK(s.mean == doctest::Approx(s.rice.mean).epsilon(0.02));
    CHECK(s.stddev == doctest::Approx(s.rice.stddev).epsilon(0.02));
    std::uint64_t total = 0;
    for (auto c : s.counts) total += c;
    CHECK(total == p.n_samples);
    CHECK(s.edges.size() == s.counts.size() + 1);

    // The wrong scale is detected.
    p.scale_override = p.eta / p.s0;
    CHECK(monte_carlo_dop(p).ks_rice > 0.05);
}

TEST_CASE("monte_carlo_dop is deterministic and seed dependent") {
    MonteCarloParams p;
    p.dop_true = 0.5;
    p.n_samples = 10000;
    CHECK(monte_carlo_samples(p) == monte_carlo_samples(p));
    MonteCarloParams q = p;
    q.seed = 2;
    CHECK(monte_carlo_samples(p) != monte_carlo_samples(q));
}

TEST_CASE("monte_carlo_dop zero-noise and argument checks") {
    MonteCarloParams p;
    p.dop_true = 0.4;
    p.eta = 0.0;
    p.n_samples = 10000;
    for (double v : monte_carlo_samples(p)) CHECK(v == 0.4);
    const MonteCarloSummary s = monte_carlo_dop(p);
    CHECK(s.exact);
    const auto j = nlohmann::json::parse(s.to_json());
    CHECK(j["exact_match"] == true);
    CHECK(j["ks_rice"].is_null());
    for (const char* key : {"params", "mean", "std", "ks_rice", "ks_gauss", "histogram"}) CHECK(j.contains(key));

    p.n_samples = 9999;
    test::require_error([&] { monte_carlo_dop(p); }, ErrorKind::Domain);
    p.n_samples = 10000;
    p.dop_true = 1.5;
    test::require_error([&] { monte_carlo_dop(p); }, ErrorKind::Domain);
}

TEST_CASE("monte_carlo_dop through the mosaic stays close to but not on the Rice law") {
    MonteCarloParams p;
    p.dop_true = 0.3;
    p.eta = 0.01;
    p.n_samples = 30000;
    p.via_mosaic = true;
    const MonteCarloSummary s = monte_carlo_dop(p);
    // Interpolation averages neighbouring noise, so the spread shrinks relative to the direct model.
    CHECK(s.mean == doctest::Approx(0.3).epsilon(0.05));
    CHECK(s.stddev < s.rice.stddev);
}

TEST_CASE("Rice versus Gaussian ordering across signal-to-noise") {
    const auto run = [](double dop, double eta) {
        MonteCarloParams p;
        p.dop_true = dop;
        p.eta = eta;
        p.n_samples = 40000;
        return monte_carlo_dop(p);
    };
    // dop / eta_p < 5
    for (auto [dop, eta] : {std::pair{0.0, 0.02}, {0.05, 0.02}, {0.08, 0.05}}) {
        const MonteCarloSummary s = run(dop, eta);
        CHECK(s.ks_rice < s.ks_gauss);
    }
    // dop / eta_p > 20
    for (auto [dop, eta] : {std::pair{0.5, 0.01}, {0.9, 0.02}}) {
        const MonteCarloSummary s = run(dop, eta);
        CHECK(s.ks_rice < 0.02);
        CHECK(s.ks_gauss < 0.02);
    }
}

TEST_CASE("enum names round trip") {
    for (UncertaintyKind k : {UncertaintyKind::Intensity, UncertaintyKind::S0, UncertaintyKind::Polarization}) {
        CHECK(parse_uncertainty_kind(to_string(k)) == k);
    }
    CHECK(std::string(to_string(NllVariant::Paper2s)) == "paper-2s");
    CHECK(parse_nll_variant("direct-s") == NllVariant::DirectS);
    test::require_error([] { parse_nll_variant("other"); }, ErrorKind::Config);
}

TEST_CASE("polarization-kind map ranks a region of concentrated DOP error") {
    const std::size_t n = 64;
    std::mt19937_64 rng(19);
    std::bernoulli_distribution coin(0.5);
    Raster s0(n, n), dop_gt(n, n, 0.3), aop(n, n, 0.2), dop_rec(n, n);
    // Error magnitude peaks smoothly at (32, 34); the marked region is the disk of radius 6 around it.
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) {
            s0(r, c) = 0.3 + 0.5 * ((r / 3 + c / 5) % 2);
            const double d2 = std::pow(r - 32.0, 2) + std::pow(c - 34.0, 2);
            const double amp = 0.005 + 0.12 * std::exp(-d2 / (2 * 8.0 * 8.0));
            dop_rec(r, c) = 0.3 + (coin(rng) ? amp : -amp);
        }
    }
    const PolarCube gt = synthesize_from_stokes(s0, dop_gt, aop);
    const PolarCube rec = synthesize_from_stokes(s0, dop_rec, aop);
    const UncertaintyMap m = residual_uncertainty_map(rec, gt, UncertaintyKind::Polarization, 5);

    std::vector<double> sorted(m.eta_p.values().begin(), m.eta_p.values().end());
    std::sort(sorted.begin(), sorted.end());
    const double top_decile = sorted[static_cast<std::size_t>(0.9 * sorted.size())];
    for (std::size_t r = 26; r <= 38; ++r) {
        for (std::size_t c = 28; c <= 40; ++c) {
            if (std::pow(r - 32.0, 2) + std::pow(c - 34.0, 2) <= 36.0) CHECK(m.eta_p(r, c) >= top_decile);
        }
    }

    // Spearman correlation with |DOP error|, midranks for ties.
    std::vector<double> err(n * n), est(n * n);
    for (std::size_t i = 0; i < n * n; ++i) {
        err[i] = std::abs(dop_rec[i] - dop_gt[i]);
        est[i] = m.eta_p[i];
    }
    const auto ranks = [](const std::vector<double>& v) {
        std::vector<std::size_t> idx(v.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < idx.size();) {
            std::size_t j = i;
            while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
            for (std::size_t k = i; k <= j; ++k) out[idx[k]] = 0.5 * static_cast<double>(i + j);
            i = j + 1;
        }
        return out;
    };
    const auto ra = ranks(err), rb = ranks(est);
    const double mean = 0.5 * static_cast<double>(n * n - 1);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < n * n; ++i) {
        sab += (ra[i] - mean) * (rb[i] - mean);
        saa += (ra[i] - mean) * (ra[i] - mean);
        sbb += (rb[i] - mean) * (rb[i] - mean);
    }
    CHECK(sab / std::sqrt(saa * sbb) > 0.8);
}
