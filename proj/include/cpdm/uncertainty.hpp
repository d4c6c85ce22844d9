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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cpdm/polar.hpp"
#include "cpdm/raster.hpp"

namespace cpdm {

inline constexpr double kEtaPFloor = 1e-8;
inline constexpr double kLogEps = 1e-6;

enum class UncertaintyKind { Intensity, S0, Polarization };

const char* to_string(UncertaintyKind kind) noexcept;
UncertaintyKind parse_uncertainty_kind(const std::string& name);

/// Which log-uncertainty coefficient the polarization NLL uses.
enum class NllVariant {
    Paper2s,  // coefficient 2s (default); MLE sqrt(sum r^2 / 2N)
    DirectS,  // coefficient s, the direct negative log of the Gaussian form; MLE sqrt(sum r^2 / N)
};

const char* to_string(NllVariant v) noexcept;
NllVariant parse_nll_variant(const std::string& name);

struct UncertaintyMap {
    Raster eta;       // intensity units
    Raster eta_p;     // DOP units
    Raster s;         // ln(eta_p)
    Raster floored;   // 1.0 where eta_p was replaced by the floor
    UncertaintyKind kind = UncertaintyKind::Polarization;

    /// The quantity the map was estimated in: eta for intensity/s0 maps, eta_p for polarization maps.
    const Raster& estimate() const noexcept {
        return kind == UncertaintyKind::Polarization ? eta_p : eta;
    }
};

/// eta_p = sqrt(2) eta / max(s0, eps), floored at kEtaPFloor.
UncertaintyMap propagate_eta_to_eta_p(const Raster& eta, const Raster& s0, double eps = kDefaultDopEps);

struct RiceParams {
    double nu = 0.0;     // location (true DOP)
    double sigma = 1.0;  // scale (eta_p)
};

double rice_pdf(double phi, const RiceParams& p);
double rice_log_pdf(double phi, const RiceParams& p);
/// Large-argument form sqrt(phi / (2 pi nu sigma^2)) exp(-(phi - nu)^2 / (2 sigma^2)).
double rice_pdf_approx(double phi, const RiceParams& p);
/// CDF by numerical integration of rice_pdf.
double rice_cdf(double phi, const RiceParams& p);

struct RiceMoments {
    double mean;
    double stddev;
};
RiceMoments rice_moments(const RiceParams& p);

struct NllResult {
    double loss = 0.0;  // mean over pixels
    Raster per_pixel;
    Raster guarded;     // 1.0 where phi or phi_tilde hit the log floor
};

/// Single-pixel loss; phi and phi_tilde must already be positive.
double nll_pu_pixel(double phi, double phi_tilde, double s, NllVariant v = NllVariant::Paper2s) noexcept;

NllResult nll_pu(const Raster& phi, const Raster& phi_tilde, const Raster& s, NllVariant v = NllVariant::Paper2s);

struct NllGradient {
    Raster d_phi_tilde;
    Raster d_s;
};

NllGradient nll_pu_grad(const Raster& phi, const Raster& phi_tilde, const Raster& s,
                        NllVariant v = NllVariant::Paper2s);

struct EtaEstimate {
    double eta_p = kEtaPFloor;
    bool degenerate = false;
};

/// Closed-form minimizer in s of the summed polarization NLL.
EtaEstimate mle_eta_p(std::span<const double> residuals, NllVariant v = NllVariant::Paper2s);

/// Plain Gaussian scale MLE sqrt(sum r^2 / N).
EtaEstimate mle_gaussian_scale(std::span<const double> residuals);

/// Windowed scale estimates from the residual between a reconstruction and a reference.
UncertaintyMap residual_uncertainty_map(const PolarCube& recon, const PolarCube& reference, UncertaintyKind kind,
                                        std::size_t window, NllVariant v = NllVariant::Paper2s,
                                        double eps = kDefaultDopEps);

struct MonteCarloParams {
    double s0 = 1.0;
    double dop_true = 0.0;
    double aop_true = 0.0;  // radians
    double eta = 0.01;
    std::size_t n_samples = 100000;
    std::uint64_t seed = 1;
    /// Rice scale used for the comparison; <= 0 selects sqrt(2) eta / s0.
    double scale_override = 0.0;
    /// Divide by the noisy S0 instead of the reference S0.
    bool noisy_denominator = false;
    /// Inject the noise through the mosaic and the initial interpolation instead of on the four intensities.
    bool via_mosaic = false;
    std::size_t histogram_bins = 50;
};

struct MonteCarloSummary {
    MonteCarloParams params;
    double rice_scale = 0.0;
    double mean = 0.0;
    double stddev = 0.0;
    RiceMoments rice{0.0, 0.0};
    bool exact = false;     // eta == 0: every sample equals dop_true, KS undefined
    double ks_rice = 0.0;
    double ks_gauss = 0.0;
    std::vector<double> edges;
    std::vector<std::uint64_t> counts;

    std::string to_json() const;
};

/// Raw DOP draws behind monte_carlo_dop, in draw order.
std::vector<double> monte_carlo_samples(const MonteCarloParams& params);

MonteCarloSummary monte_carlo_dop(const MonteCarloParams& params);

/// Kolmogorov-Smirnov distance between sorted samples and a CDF evaluated at each sample.
double ks_statistic(std::span<const double> sorted, std::span<const double> cdf_at_samples);

}  // namespace cpdm
