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
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cpdm/error.hpp"
#include "cpdm/fusion.hpp"
#include "cpdm/harness.hpp"

namespace cpdm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::pair<std::string, std::string>> provenance(const std::string& hash) {
    if (hash.empty()) return {};
    return {{"cpdm:config_hash", hash}};
}

void write_gray(const Raster& r, const std::string& path, const std::string& hash) {
    png::Image img{r.height(), r.width(), 1, 16, std::vector<double>(r.values().begin(), r.values().end()),
                   provenance(hash)};
    png::write16(path, img);
}

/// Cyclic 180-degree map: AOP -90..90 degrees walks once around the hue circle.
void write_aop(const Raster& aop_rad, const std::string& path, const std::string& hash) {
    png::Image img{aop_rad.height(), aop_rad.width(), 3, 16, std::vector<double>(aop_rad.size() * 3), provenance(hash)};
    for (std::size_t i = 0; i < aop_rad.size(); ++i) {
        const double hue = std::clamp((aop_rad[i] + std::numbers::pi / 2) / std::numbers::pi, 0.0, 1.0) * 6.0;
        const double f = hue - std::floor(hue);
        double r = 0, g = 0, b = 0;
        switch (static_cast<int>(std::floor(hue)) % 6) {
            case 0: r = 1; g = f; break;
            case 1: r = 1 - f; g = 1; break;
            case 2: g = 1; b = f; break;
            case 3: g = 1 - f; b = 1; break;
            case 4: r = f; b = 1; break;
            default: r = 1; b = 1 - f; break;
        }
        img.data[3 * i] = r;
        img.data[3 * i + 1] = g;
        img.data[3 * i + 2] = b;
    }
    png::write16(path, img);
}

void write_method(const PolarCube& cube, const fs::path& dir, const std::string& hash) {
    write_cube(cube, dir.string(), hash);
    const StokesMap s = compute_stokes(cube);
    write_gray(s.mean_dop(), (dir / "dop.png").string(), hash);
    write_aop(s.mean_aop(), (dir / "aop.png").string(), hash);
}

json fusion_json(const FusionWeights& w) {
    return {{"lo", w.lo}, {"hi", w.hi}, {"lo_pct", w.lo_pct}, {"hi_pct", w.hi_pct},
            {"degenerate", w.degenerate}, {"scheme", "per-image"}};
}

json metrics_json(const MetricsReport& r) {
    return {{"method", r.method},       {"scene", r.scene},         {"config_hash", r.config_hash},
            {"psnr_mean", r.psnr_mean}, {"psnr_s0", r.psnr_s0},     {"psnr_dop", r.psnr_dop},
            {"psnr_aop", r.psnr_aop},   {"ssim_mean", r.ssim_mean}, {"ssim_s0", r.ssim_s0},
            {"ssim_dop", r.ssim_dop},   {"mae_deg", r.mae_deg}};
}

std::uint64_t scene_seed(std::uint64_t seed, const std::string& id) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : id) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return seed ^ h;
}

void write_text(const fs::path& path, const std::string& text) {
    std::error_code ec;
    if (!path.parent_path().empty()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
    out << text;
}

std::string csv_join(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) line += (i ? "," : "") + cells[i];
    return line + "\n";
}

}  // namespace

std::string metrics_to_json(const MetricsReport& r) { return metrics_json(r).dump(); }

void write_cube(const PolarCube& cube, const std::string& dir, const std::string& config_hash) {
    static constexpr const char* kDirs[4] = {"000", "045", "090", "135"};
    for (Angle a : kAngles) {
        png::Image img{cube.height(), cube.width(), 3, 16, std::vector<double>(cube.height() * cube.width() * 3),
                       provenance(config_hash)};
        for (Color c : kColors) {
            const Raster& p = cube.plane(a, c);
            for (std::size_t i = 0; i < p.size(); ++i) img.data[3 * i + static_cast<std::size_t>(c)] = p[i];
        }
        png::write16((fs::path(dir) / kDirs[static_cast<int>(a)] / "rgb.png").string(), img);
    }
}

void write_mosaic(const CpfaMosaic& m, const std::string& path, const std::string& config_hash) {
    write_gray(m.raster, path, config_hash);
}

CpfaMosaic read_mosaic(const std::string& path, const CpfaLayout& layout) {
    const png::Image img = png::read(path);
    if (img.channels != 1) fail(ErrorKind::Input, "mosaic '" + path + "' must be a single-channel PNG");
    if (img.height % 4 != 0 || img.width % 4 != 0) {
        fail(ErrorKind::Input, "mosaic '" + path + "': dimensions must be divisible by 4");
    }
    CpfaMosaic m{Raster(img.height, img.width), layout};
    std::copy(img.data.begin(), img.data.end(), m.raster.values().begin());
    return m;
}

Reconstructions reconstruct_all(const CpfaMosaic& m, const RunConfig& cfg) {
    cfg.validate();
    Reconstructions out;
    out.initial = interpolate_initial(split_channels(m));
    out.base = reconstruct_base(m, cfg.branch.lambda_b);
    out.smooth = regularize_polarization(out.base, cfg.branch.sigma_r);

    const std::size_t h = m.raster.height(), w = m.raster.width();
    const StokesMap sb = compute_stokes(out.base, cfg.eps);
    const auto log_uncertainty = [&](const Raster& s0) -> Raster {
        if (cfg.source == UncertaintySource::Propagated) {
            return propagate_eta_to_eta_p(Raster(h, w, cfg.noise_sigma()), s0, cfg.eps).s;
        }
        return residual_uncertainty_map(out.base, out.smooth, UncertaintyKind::Polarization, cfg.residual_window,
                                        cfg.nll, cfg.eps).s;
    };

    if (cfg.per_color_weights) {
        for (std::size_t c = 0; c < 3; ++c) {
            out.color_weights[c] = normalize_log_uncertainty(log_uncertainty(sb.s0[c]), cfg.lo_pct, cfg.hi_pct);
        }
        out.weights = out.color_weights[1];
        out.fused = fuse(out.base, out.smooth, out.color_weights);
    } else {
        Raster s0(h, w);
        for (std::size_t i = 0; i < s0.size(); ++i) s0[i] = (sb.s0[0][i] + sb.s0[1][i] + sb.s0[2][i]) / 3.0;
        out.weights = normalize_log_uncertainty(log_uncertainty(s0), cfg.lo_pct, cfg.hi_pct);
        out.color_weights = {out.weights, out.weights, out.weights};
        out.fused = fuse(out.base, out.smooth, out.weights);
    }
    return out;
}

void write_reconstructions(const Reconstructions& rec, const std::string& dir, const std::string& config_hash) {
    const fs::path root(dir);
    write_method(rec.initial, root / "initial", config_hash);
    write_method(rec.base, root / "base", config_hash);
    write_method(rec.smooth, root / "smooth", config_hash);
    write_method(rec.fused, root / "fused", config_hash);
    write_gray(rec.weights.s_bar, (root / "s_bar.png").string(), config_hash);
}

SceneResult run_scene(const std::string& scene_spec, const RunConfig& cfg) {
    SceneResult res;
    res.scene = scene_spec;
    try {
        cfg.validate();
        const SceneDescriptor desc = parse_scene(scene_spec, cfg.scene_size);
        res.scene = desc.id;
        const PolarCube gt = ingest_scene(desc);
        const std::string hash = cfg.hash();
        const CpfaLayout layout = cfg.resolve_layout();
        const CpfaMosaic raw = mosaic(gt, layout);
        const CpfaMosaic noisy = add_noise(raw, {cfg.noise_sigma(), scene_seed(cfg.seed, desc.id)});
        const Reconstructions rec = reconstruct_all(noisy, cfg);
        res.weights = rec.weights;

        const std::pair<const char*, const PolarCube*> methods[] = {
            {"initial", &rec.initial}, {"base", &rec.base}, {"smooth", &rec.smooth}, {"fused", &rec.fused}};
        for (const auto& [name, cube] : methods) res.reports.push_back(full_report(*cube, gt, name, desc.id, hash));

        const fs::path dir = fs::path(cfg.out_dir) / desc.id;
        write_mosaic(noisy, (dir / "mosaic.png").string(), hash);
        write_method(gt, dir / "gt", hash);
        write_reconstructions(rec, dir.string(), hash);

        json bundle;
        bundle["scene"] = desc.id;
        bundle["config_hash"] = hash;
        bundle["fusion"] = fusion_json(rec.weights);
        bundle["reports"] = json::array();
        for (const auto& r : res.reports) bundle["reports"].push_back(metrics_json(r));
        write_text(dir / "report.json", bundle.dump(2) + "\n");
        res.ok = true;
    } catch (const Error& e) {
        res.error = e.what();
        res.error_kind = to_string(e.kind());
    } catch (const std::exception& e) {
        res.error = e.what();
        res.error_kind = "internal";
    }
    return res;
}

std::string run_pipeline(const std::vector<std::string>& scenes, const RunConfig& cfg, unsigned jobs,
                         std::size_t* failures) {
    cfg.validate();
    const std::string hash = cfg.hash();
    std::vector<SceneResult> results(scenes.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < scenes.size(); i = next++) results[i] = run_scene(scenes[i], cfg);
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(scenes.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    json bundle;
    bundle["config"] = json::parse(cfg.to_json(false));
    bundle["config_hash"] = hash;
    bundle["conventions"] = {
        {"mae_unit", "degrees"},
        {"psnr_cap_db", kPsnrCap},
        {"psnr_peak", {{"intensity", 1.0}, {"s0", 1.0}, {"dop", 1.0}, {"aop_deg", 90.0}}},
        {"dop_color_reduction", "arithmetic mean over R,G,B"},
        {"aop_color_reduction", "axial mean over R,G,B (doubled-angle average)"},
        {"ssim", {{"window", 11}, {"sigma", 1.5}, {"k1", 0.01}, {"k2", 0.03}, {"dynamic_range", 1.0}}},
        {"normalization", "per-image"},
        {"noise_seed", "config seed xor FNV-1a(scene id)"}};
    bundle["scenes"] = json::array();
    std::size_t failed = 0;
    std::string csv = csv_join(MetricsReport::csv_header());
    for (const auto& r : results) {
        json s;
        s["scene"] = r.scene;
        s["ok"] = r.ok;
        if (r.ok) {
            s["fusion"] = fusion_json(r.weights);
            s["reports"] = json::array();
            for (const auto& m : r.reports) {
                s["reports"].push_back(metrics_json(m));
                csv += csv_join(m.csv_row());
            }
        } else {
            ++failed;
            s["error"] = {{"kind", r.error_kind}, {"message", r.error}};
        }
        bundle["scenes"].push_back(s);
    }
    const std::string text = bundle.dump(2) + "\n";
    write_text(fs::path(cfg.out_dir) / "report.json", text);
    write_text(fs::path(cfg.out_dir) / "report.csv", csv);
    if (failures) *failures = failed;
    return text;
}

ValidationGrid ValidationGrid::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorKind::Config, std::string("validation grid is not valid JSON: ") + e.what());
    }
    ValidationGrid g;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "dop_true") g.dop_true = value.get<std::vector<double>>();
            else if (key == "eta") g.eta = value.get<std::vector<double>>();
            else if (key == "s0") g.s0 = value.get<std::vector<double>>();
            else if (key == "aop_true") g.aop_true = value.get<double>();
            else if (key == "n_samples") g.n_samples = value.get<std::size_t>();
            else if (key == "seed") g.seed = value.get<std::uint64_t>();
            else if (key == "ks_tol") g.ks_tol = value.get<double>();
            else if (key == "moment_tol") g.moment_tol = value.get<double>();
            else if (key == "negative_control_min_ks") g.negative_control_min_ks = value.get<double>();
            else if (key == "self_test") g.self_test = value.get<bool>();
            else fail(ErrorKind::Config, "unknown validation grid key '" + key + "'");
        }
    } catch (const json::exception&) {
        fail(ErrorKind::Config, "validation grid has a field of the wrong type");
    }
    if (g.dop_true.empty() || g.eta.empty() || g.s0.empty()) fail(ErrorKind::Config, "validation grid has an empty axis");
    return g;
}

std::string validate_uncertainty(const ValidationGrid& grid, bool& passed, unsigned jobs) {
    struct Point {
        double dop, eta, s0;
    };
    std::vector<Point> points;
    for (double d : grid.dop_true)
        for (double e : grid.eta)
            for (double s : grid.s0) points.push_back({d, e, s});

    std::vector<json> rows(points.size());
    std::vector<char> ok(points.size(), 0);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < points.size(); i = next++) {
            const Point& p = points[i];
            MonteCarloParams mc;
            mc.s0 = p.s0;
            mc.dop_true = p.dop;
            mc.aop_true = grid.aop_true;
            mc.eta = p.eta;
            mc.n_samples = grid.n_samples;
            mc.seed = grid.seed + 0x9E3779B97F4A7C15ull * (i + 1);
            if (grid.self_test) mc.scale_override = p.eta;
            const MonteCarloSummary sum = monte_carlo_dop(mc);
            json row = json::parse(sum.to_json());
            json checks = json::object();
            bool row_ok = true;
            if (sum.exact) {
                row["status"] = "exact";
                const auto samples = monte_carlo_samples(mc);
                row_ok = std::all_of(samples.begin(), samples.end(), [&](double v) { return v == p.dop; });
                checks["all_samples_equal_dop"] = row_ok;
            } else if (grid.self_test) {
                row_ok = sum.ks_rice > grid.negative_control_min_ks;
                checks["wrong_scale_detected"] = row_ok;
            } else {
                const bool ks_ok = sum.ks_rice < grid.ks_tol;
                const bool mean_ok = std::abs(sum.mean - sum.rice.mean) <= grid.moment_tol * sum.rice.mean;
                const bool std_ok = std::abs(sum.stddev - sum.rice.stddev) <= grid.moment_tol * sum.rice.stddev;
                checks["ks_rice"] = ks_ok;
                checks["mean"] = mean_ok;
                checks["std"] = std_ok;
                row_ok = ks_ok && mean_ok && std_ok;
                const double snr = p.dop / sum.rice_scale;
                if (snr < 5.0) {
                    checks["rice_beats_gauss"] = sum.ks_rice < sum.ks_gauss;
                    row_ok = row_ok && sum.ks_rice < sum.ks_gauss;
                } else if (snr > 20.0) {
                    const bool both = sum.ks_rice < 0.02 && sum.ks_gauss < 0.02;
                    checks["both_fit"] = both;
                    row_ok = row_ok && both;
                }
                row["snr"] = snr;
            }
            row["checks"] = checks;
            if (!sum.exact) row["status"] = row_ok ? "pass" : "fail";
            rows[i] = row;
            ok[i] = row_ok ? 1 : 0;
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(points.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    passed = std::all_of(ok.begin(), ok.end(), [](char v) { return v != 0; });
    json out;
    out["mode"] = grid.self_test ? "self-test (wrong scale eta)" : "rice scale sqrt(2) eta / s0";
    out["tolerances"] = {{"ks_rice", grid.ks_tol}, {"moments_rel", grid.moment_tol},
                         {"negative_control_min_ks", grid.negative_control_min_ks}};
    out["n_samples"] = grid.n_samples;
    out["rows"] = rows;
    out["passed"] = passed;
    return out.dump(2) + "\n";
}

AggregateTables aggregate_reports(const std::vector<std::string>& bundle_jsons) {
    if (bundle_jsons.empty()) fail(ErrorKind::Input, "report: no bundles given");
    std::string hash;
    std::vector<MetricsReport> all;
    for (const auto& text : bundle_jsons) {
        json b;
        try {
            b = json::parse(text);
        } catch (const json::exception& e) {
            fail(ErrorKind::Input, std::string("report: bundle is not valid JSON: ") + e.what());
        }
        if (!b.contains("config_hash") || !b.contains("scenes")) fail(ErrorKind::Input, "report: not a report bundle");
        const std::string h = b["config_hash"].get<std::string>();
        if (hash.empty()) hash = h;
        if (h != hash) fail(ErrorKind::Validation, "report: config hash mismatch (" + hash + " vs " + h + ")");
        for (const auto& s : b["scenes"]) {
            if (!s.value("ok", false)) continue;
            for (const auto& r : s["reports"]) {
                MetricsReport m;
                m.method = r["method"];
                m.scene = r["scene"];
                m.config_hash = r["config_hash"];
                if (m.config_hash != hash) fail(ErrorKind::Validation, "report: config hash mismatch in " + m.scene);
                m.psnr_mean = r["psnr_mean"];
                m.psnr_s0 = r["psnr_s0"];
                m.psnr_dop = r["psnr_dop"];
                m.psnr_aop = r["psnr_aop"];
                m.ssim_mean = r["ssim_mean"];
                m.ssim_s0 = r["ssim_s0"];
                m.ssim_dop = r["ssim_dop"];
                m.mae_deg = r["mae_deg"];
                all.push_back(m);
            }
        }
    }
    AggregateTables t;
    t.csv = csv_join(MetricsReport::csv_header());
    for (const auto& m : all) t.csv += csv_join(m.csv_row());

    // Per-method means in first-seen order.
    std::vector<std::string> order;
    std::map<std::string, std::pair<MetricsReport, std::size_t>> acc;
    for (const auto& m : all) {
        auto [it, fresh] = acc.try_emplace(m.method, MetricsReport{}, 0);
        if (fresh) order.push_back(m.method);
        auto& [s, n] = it->second;
        s.psnr_mean += m.psnr_mean;
        s.psnr_s0 += m.psnr_s0;
        s.psnr_dop += m.psnr_dop;
        s.mae_deg += m.mae_deg;
        s.ssim_mean += m.ssim_mean;
        s.ssim_s0 += m.ssim_s0;
        s.ssim_dop += m.ssim_dop;
        s.psnr_aop += m.psnr_aop;
        ++n;
    }
    std::ostringstream md;
    md << "config hash: `" << hash << "`\n\n";
    md << "| Method | PSNR_mean | PSNR_S0 | PSNR_DOP | MAE (deg) | SSIM_mean | SSIM_S0 | SSIM_DOP | PSNR_AOP | scenes |\n";
    md << "|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& name : order) {
        const auto& [s, n] = acc[name];
        const double k = static_cast<double>(n);
        char line[512];
        std::snprintf(line, sizeof line, "| %s | %.4f | %.4f | %.4f | %.4f | %.4f | %.4f | %.4f | %.4f | %zu |\n",
                      name.c_str(), s.psnr_mean / k, s.psnr_s0 / k, s.psnr_dop / k, s.mae_deg / k, s.ssim_mean / k,
                      s.ssim_s0 / k, s.ssim_dop / k, s.psnr_aop / k, n);
        md << line;
    }
    t.markdown = md.str();
    return t;
}

}  // namespace cpdm
