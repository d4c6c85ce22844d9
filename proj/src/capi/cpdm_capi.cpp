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
#include "cpdm/cpdm.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "cpdm/error.hpp"
#include "cpdm/harness.hpp"
#include "cpdm/uncertainty.hpp"

struct cpdm_config {
    cpdm::RunConfig cfg;
};

struct cpdm_cube {
    cpdm::PolarCube cube;
};

struct cpdm_mosaic {
    cpdm::CpfaMosaic m;
};

namespace {

thread_local std::string g_last_error;

cpdm_status status_of(cpdm::ErrorKind kind) {
    switch (kind) {
        case cpdm::ErrorKind::Structural: return CPDM_ERR_STRUCTURAL;
        case cpdm::ErrorKind::Domain: return CPDM_ERR_DOMAIN;
        case cpdm::ErrorKind::Config: return CPDM_ERR_CONFIG;
        case cpdm::ErrorKind::Input: return CPDM_ERR_INPUT;
        case cpdm::ErrorKind::Io: return CPDM_ERR_IO;
        case cpdm::ErrorKind::Validation: return CPDM_ERR_VALIDATION;
    }
    return CPDM_ERR_INTERNAL;
}

template <typename F>
cpdm_status guarded(F&& body) noexcept {
    try {
        g_last_error.clear();
        return body();
    } catch (const cpdm::Error& e) {
        g_last_error = e.what();
        return status_of(e.kind());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return CPDM_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CPDM_ERR_INTERNAL;
    }
}

cpdm_status bad_argument(const char* what) {
    g_last_error = what;
    return CPDM_ERR_ARGUMENT;
}

char* dup_string(const std::string& s) {
    auto* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::string read_file(const char* path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) cpdm::fail(cpdm::ErrorKind::Input, std::string("cannot read '") + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool angle_of(int deg, cpdm::Angle& a) {
    switch (deg) {
        case 0: a = cpdm::Angle::Deg0; return true;
        case 45: a = cpdm::Angle::Deg45; return true;
        case 90: a = cpdm::Angle::Deg90; return true;
        case 135: a = cpdm::Angle::Deg135; return true;
        default: return false;
    }
}

bool color_of(char code, cpdm::Color& c) {
    switch (code) {
        case 'R': c = cpdm::Color::R; return true;
        case 'G': c = cpdm::Color::G; return true;
        case 'B': c = cpdm::Color::B; return true;
        default: return false;
    }
}

}  // namespace

extern "C" {

const char* cpdm_version(void) { return "1.0.0"; }

const char* cpdm_last_error(void) { return g_last_error.c_str(); }

const char* cpdm_status_name(cpdm_status status) {
    switch (status) {
        case CPDM_OK: return "ok";
        case CPDM_ERR_ARGUMENT: return "invalid argument";
        case CPDM_ERR_STRUCTURAL: return "structural error";
        case CPDM_ERR_DOMAIN: return "domain error";
        case CPDM_ERR_CONFIG: return "config error";
        case CPDM_ERR_INPUT: return "input error";
        case CPDM_ERR_IO: return "io error";
        case CPDM_ERR_VALIDATION: return "validation failure";
        case CPDM_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void cpdm_string_free(char* str) { std::free(str); }

cpdm_status cpdm_config_new(cpdm_config** out) {
    if (!out) return bad_argument("cpdm_config_new: out is null");
    return guarded([&] {
        *out = new cpdm_config{};
        return CPDM_OK;
    });
}

cpdm_status cpdm_config_from_json(const char* json, cpdm_config** out) {
    if (!json || !out) return bad_argument("cpdm_config_from_json: null argument");
    return guarded([&] {
        *out = new cpdm_config{cpdm::RunConfig::from_json(json)};
        return CPDM_OK;
    });
}

cpdm_status cpdm_config_load(const char* path, cpdm_config** out) {
    if (!path || !out) return bad_argument("cpdm_config_load: null argument");
    return guarded([&] {
        *out = new cpdm_config{cpdm::RunConfig::from_json(read_file(path))};
        return CPDM_OK;
    });
}

cpdm_status cpdm_config_set_sigma(cpdm_config* cfg, double sigma) {
    if (!cfg) return bad_argument("cpdm_config_set_sigma: cfg is null");
    if (!(sigma >= 0.0)) {
        g_last_error = "noise sigma must be >= 0";
        return CPDM_ERR_CONFIG;
    }
    cfg->cfg.sigma = sigma;
    return CPDM_OK;
}

cpdm_status cpdm_config_set_seed(cpdm_config* cfg, uint64_t seed) {
    if (!cfg) return bad_argument("cpdm_config_set_seed: cfg is null");
    cfg->cfg.seed = seed;
    return CPDM_OK;
}

cpdm_status cpdm_config_set_out_dir(cpdm_config* cfg, const char* dir) {
    if (!cfg || !dir) return bad_argument("cpdm_config_set_out_dir: null argument");
    return guarded([&] {
        cfg->cfg.out_dir = dir;
        return CPDM_OK;
    });
}

cpdm_status cpdm_config_validate(const cpdm_config* cfg) {
    if (!cfg) return bad_argument("cpdm_config_validate: cfg is null");
    return guarded([&] {
        cfg->cfg.validate();
        cfg->cfg.resolve_layout();
        return CPDM_OK;
    });
}

cpdm_status cpdm_config_to_json(const cpdm_config* cfg, char** out) {
    if (!cfg || !out) return bad_argument("cpdm_config_to_json: null argument");
    return guarded([&] {
        *out = dup_string(cfg->cfg.to_json(true));
        return CPDM_OK;
    });
}

cpdm_status cpdm_config_hash(const cpdm_config* cfg, char** out) {
    if (!cfg || !out) return bad_argument("cpdm_config_hash: null argument");
    return guarded([&] {
        *out = dup_string(cfg->cfg.hash());
        return CPDM_OK;
    });
}

void cpdm_config_free(cpdm_config* cfg) { delete cfg; }

cpdm_status cpdm_layout_json(const cpdm_config* cfg, char** out) {
    if (!out) return bad_argument("cpdm_layout_json: out is null");
    return guarded([&] {
        *out = dup_string(cfg ? cfg->cfg.resolve_layout().to_json() : cpdm::default_layout().to_json());
        return CPDM_OK;
    });
}

cpdm_status cpdm_suite_json(char** out) {
    if (!out) return bad_argument("cpdm_suite_json: out is null");
    return guarded([&] {
        *out = dup_string(nlohmann::json(cpdm::default_suite()).dump());
        return CPDM_OK;
    });
}

cpdm_status cpdm_cube_new(size_t height, size_t width, cpdm_cube** out) {
    if (!out) return bad_argument("cpdm_cube_new: out is null");
    return guarded([&] {
        *out = new cpdm_cube{cpdm::PolarCube(height, width)};
        return CPDM_OK;
    });
}

cpdm_status cpdm_cube_load_scene(const char* scene, const cpdm_config* cfg, cpdm_cube** out) {
    if (!scene || !out) return bad_argument("cpdm_cube_load_scene: null argument");
    return guarded([&] {
        const std::size_t size = cfg ? cfg->cfg.scene_size : cpdm::RunConfig{}.scene_size;
        *out = new cpdm_cube{cpdm::ingest_scene(cpdm::parse_scene(scene, size))};
        return CPDM_OK;
    });
}

cpdm_status cpdm_cube_dims(const cpdm_cube* cube, size_t* height, size_t* width) {
    if (!cube || !height || !width) return bad_argument("cpdm_cube_dims: null argument");
    *height = cube->cube.height();
    *width = cube->cube.width();
    return CPDM_OK;
}

cpdm_status cpdm_cube_plane(cpdm_cube* cube, int angle_deg, char color, double** data) {
    cpdm::Angle a{};
    cpdm::Color c{};
    if (!cube || !data) return bad_argument("cpdm_cube_plane: null argument");
    if (!angle_of(angle_deg, a) || !color_of(color, c)) return bad_argument("cpdm_cube_plane: unknown plane");
    *data = cube->cube.plane(a, c).values().data();
    return CPDM_OK;
}

cpdm_status cpdm_cube_plane_const(const cpdm_cube* cube, int angle_deg, char color, const double** data) {
    cpdm::Angle a{};
    cpdm::Color c{};
    if (!cube || !data) return bad_argument("cpdm_cube_plane_const: null argument");
    if (!angle_of(angle_deg, a) || !color_of(color, c)) return bad_argument("cpdm_cube_plane_const: unknown plane");
    *data = cube->cube.plane(a, c).values().data();
    return CPDM_OK;
}

cpdm_status cpdm_cube_stokes(const cpdm_cube* cube, char color, double* s0, double* s1, double* s2, double* dop,
                             double* aop) {
    cpdm::Color c{};
    if (!cube) return bad_argument("cpdm_cube_stokes: cube is null");
    if (!color_of(color, c)) return bad_argument("cpdm_cube_stokes: unknown color");
    return guarded([&] {
        const cpdm::StokesMap m = cpdm::compute_stokes(cube->cube);
        const auto ci = static_cast<std::size_t>(c);
        const auto copy = [](const cpdm::Raster& r, double* dst) {
            if (dst) std::memcpy(dst, r.values().data(), r.size() * sizeof(double));
        };
        copy(m.s0[ci], s0);
        copy(m.s1[ci], s1);
        copy(m.s2[ci], s2);
        copy(m.dop[ci], dop);
        copy(m.aop[ci], aop);
        return CPDM_OK;
    });
}

cpdm_status cpdm_cube_save(const cpdm_cube* cube, const char* dir) {
    if (!cube || !dir) return bad_argument("cpdm_cube_save: null argument");
    return guarded([&] {
        cpdm::write_cube(cube->cube, dir);
        return CPDM_OK;
    });
}

void cpdm_cube_free(cpdm_cube* cube) { delete cube; }

cpdm_status cpdm_mosaic_simulate(const cpdm_cube* cube, const cpdm_config* cfg, cpdm_mosaic** out) {
    if (!cube || !cfg || !out) return bad_argument("cpdm_mosaic_simulate: null argument");
    return guarded([&] {
        const cpdm::RunConfig& c = cfg->cfg;
        const cpdm::CpfaMosaic m = cpdm::mosaic(cube->cube, c.resolve_layout());
        *out = new cpdm_mosaic{cpdm::add_noise(m, {c.noise_sigma(), c.seed})};
        return CPDM_OK;
    });
}

cpdm_status cpdm_mosaic_load(const char* png_path, const cpdm_config* cfg, cpdm_mosaic** out) {
    if (!png_path || !out) return bad_argument("cpdm_mosaic_load: null argument");
    return guarded([&] {
        const cpdm::CpfaLayout layout = cfg ? cfg->cfg.resolve_layout() : cpdm::default_layout();
        *out = new cpdm_mosaic{cpdm::read_mosaic(png_path, layout)};
        return CPDM_OK;
    });
}

cpdm_status cpdm_mosaic_save(const cpdm_mosaic* m, const char* png_path) {
    if (!m || !png_path) return bad_argument("cpdm_mosaic_save: null argument");
    return guarded([&] {
        cpdm::write_mosaic(m->m, png_path);
        return CPDM_OK;
    });
}

cpdm_status cpdm_mosaic_dims(const cpdm_mosaic* m, size_t* height, size_t* width) {
    if (!m || !height || !width) return bad_argument("cpdm_mosaic_dims: null argument");
    *height = m->m.raster.height();
    *width = m->m.raster.width();
    return CPDM_OK;
}

cpdm_status cpdm_mosaic_data(const cpdm_mosaic* m, const double** data) {
    if (!m || !data) return bad_argument("cpdm_mosaic_data: null argument");
    *data = m->m.raster.values().data();
    return CPDM_OK;
}

void cpdm_mosaic_free(cpdm_mosaic* m) { delete m; }

cpdm_status cpdm_demosaic(const cpdm_mosaic* m, const cpdm_config* cfg, cpdm_method method, cpdm_cube** out) {
    if (!m || !cfg || !out) return bad_argument("cpdm_demosaic: null argument");
    if (method < CPDM_METHOD_INITIAL || method > CPDM_METHOD_FUSED) return bad_argument("cpdm_demosaic: unknown method");
    return guarded([&] {
        const cpdm::RunConfig& c = cfg->cfg;
        switch (method) {
            case CPDM_METHOD_INITIAL:
                *out = new cpdm_cube{cpdm::interpolate_initial(cpdm::split_channels(m->m))};
                break;
            case CPDM_METHOD_BASE: *out = new cpdm_cube{cpdm::reconstruct_base(m->m, c.branch.lambda_b)}; break;
            case CPDM_METHOD_SMOOTH: *out = new cpdm_cube{cpdm::reconstruct_smooth(m->m, c.branch)}; break;
            case CPDM_METHOD_FUSED: *out = new cpdm_cube{cpdm::reconstruct_all(m->m, c).fused}; break;
        }
        return CPDM_OK;
    });
}

cpdm_status cpdm_demosaic_write_all(const cpdm_mosaic* m, const cpdm_config* cfg, const char* out_dir) {
    if (!m || !cfg || !out_dir) return bad_argument("cpdm_demosaic_write_all: null argument");
    return guarded([&] {
        const cpdm::Reconstructions rec = cpdm::reconstruct_all(m->m, cfg->cfg);
        cpdm::write_reconstructions(rec, out_dir, cfg->cfg.hash());
        return CPDM_OK;
    });
}

cpdm_status cpdm_evaluate(const cpdm_cube* recon, const cpdm_cube* gt, const char* method, const char* scene,
                          const cpdm_config* cfg, char** report_json) {
    if (!recon || !gt || !report_json) return bad_argument("cpdm_evaluate: null argument");
    return guarded([&] {
        const std::string hash = cfg ? cfg->cfg.hash() : std::string{};
        const cpdm::MetricsReport r =
            cpdm::full_report(recon->cube, gt->cube, method ? method : "", scene ? scene : "", hash);
        *report_json = dup_string(cpdm::metrics_to_json(r));
        return CPDM_OK;
    });
}

cpdm_status cpdm_run(const char* const* scenes, size_t n_scenes, const cpdm_config* cfg, unsigned jobs,
                     char** bundle_json, size_t* failures) {
    if (!cfg || (!scenes && n_scenes > 0)) return bad_argument("cpdm_run: null argument");
    return guarded([&] {
        std::vector<std::string> ids;
        for (size_t i = 0; i < n_scenes; ++i) {
            if (!scenes[i]) cpdm::fail(cpdm::ErrorKind::Input, "cpdm_run: null scene id");
            ids.emplace_back(scenes[i]);
        }
        if (ids.empty()) ids = cpdm::default_suite();
        std::size_t failed = 0;
        const std::string text = cpdm::run_pipeline(ids, cfg->cfg, jobs, &failed);
        if (bundle_json) *bundle_json = dup_string(text);
        if (failures) *failures = failed;
        return CPDM_OK;
    });
}

cpdm_status cpdm_validate_uncertainty(const char* grid_json, int self_test, unsigned jobs, char** summary_json) {
    return guarded([&] {
        cpdm::ValidationGrid grid = grid_json ? cpdm::ValidationGrid::from_json(grid_json) : cpdm::ValidationGrid{};
        if (self_test) grid.self_test = true;
        bool passed = false;
        const std::string text = cpdm::validate_uncertainty(grid, passed, jobs);
        if (summary_json) *summary_json = dup_string(text);
        if (!passed) {
            g_last_error = "uncertainty validation: a tolerance was violated";
            return CPDM_ERR_VALIDATION;
        }
        return CPDM_OK;
    });
}

cpdm_status cpdm_aggregate(const char* const* bundle_jsons, size_t n, char** csv, char** markdown) {
    if (!bundle_jsons && n > 0) return bad_argument("cpdm_aggregate: null argument");
    return guarded([&] {
        std::vector<std::string> bundles;
        for (size_t i = 0; i < n; ++i) {
            if (!bundle_jsons[i]) cpdm::fail(cpdm::ErrorKind::Input, "cpdm_aggregate: null bundle");
            bundles.emplace_back(bundle_jsons[i]);
        }
        const cpdm::AggregateTables t = cpdm::aggregate_reports(bundles);
        if (csv) *csv = dup_string(t.csv);
        if (markdown) *markdown = dup_string(t.markdown);
        return CPDM_OK;
    });
}

cpdm_status cpdm_rice_pdf(double phi, double nu, double sigma, double* out) {
    if (!out) return bad_argument("cpdm_rice_pdf: out is null");
    return guarded([&] {
        *out = cpdm::rice_pdf(phi, {nu, sigma});
        return CPDM_OK;
    });
}

cpdm_status cpdm_rice_pdf_approx(double phi, double nu, double sigma, double* out) {
    if (!out) return bad_argument("cpdm_rice_pdf_approx: out is null");
    return guarded([&] {
        *out = cpdm::rice_pdf_approx(phi, {nu, sigma});
        return CPDM_OK;
    });
}

cpdm_status cpdm_propagate_eta_p(double eta, double s0, double eps, double* eta_p) {
    if (!eta_p) return bad_argument("cpdm_propagate_eta_p: out is null");
    return guarded([&] {
        const auto m = cpdm::propagate_eta_to_eta_p(cpdm::Raster(1, 1, eta), cpdm::Raster(1, 1, s0), eps);
        *eta_p = m.eta_p[0];
        return CPDM_OK;
    });
}

cpdm_status cpdm_mle_eta_p(const double* residuals, size_t n, cpdm_nll_variant variant, double* eta_p,
                           int* degenerate) {
    if ((!residuals && n > 0) || !eta_p) return bad_argument("cpdm_mle_eta_p: null argument");
    if (variant != CPDM_NLL_PAPER_2S && variant != CPDM_NLL_DIRECT_S) return bad_argument("cpdm_mle_eta_p: variant");
    return guarded([&] {
        const auto est = cpdm::mle_eta_p(std::span<const double>(residuals, n),
                                         variant == CPDM_NLL_PAPER_2S ? cpdm::NllVariant::Paper2s
                                                                      : cpdm::NllVariant::DirectS);
        *eta_p = est.eta_p;
        if (degenerate) *degenerate = est.degenerate ? 1 : 0;
        return CPDM_OK;
    });
}

}  // extern "C"
