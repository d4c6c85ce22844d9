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
// Command-line harness over the cpdm C API.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpdm/cpdm.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitInput = 2;

struct CliError {
    int code;
    std::string message;
};

void check(cpdm_status st) {
    if (st == CPDM_OK) return;
    throw CliError{st == CPDM_ERR_VALIDATION ? kExitValidation : kExitInput,
                   std::string(cpdm_status_name(st)) + ": " + cpdm_last_error()};
}

// Owns a malloc'd string returned by the library.
struct LibString {
    char* p = nullptr;
    LibString() = default;
    LibString(const LibString&) = delete;
    LibString& operator=(const LibString&) = delete;
    ~LibString() { cpdm_string_free(p); }
    std::string str() const { return p ? p : ""; }
};

template <typename T, void (*Free)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() { Free(p); }
};

using Config = Handle<cpdm_config, cpdm_config_free>;
using Cube = Handle<cpdm_cube, cpdm_cube_free>;
using Mosaic = Handle<cpdm_mosaic, cpdm_mosaic_free>;

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CliError{kExitInput, "cannot read '" + path + "'"};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw CliError{kExitInput, "cannot write '" + path.string() + "'"};
}

struct CommonFlags {
    std::string config;
    std::vector<std::string> scenes;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<double> sigma;
    unsigned jobs = 1;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool scenes = true) {
    cmd->add_option("--config", f.config, "JSON config file");
    if (scenes) cmd->add_option("--scene", f.scenes, "Scene id (name or name@seed) or scene directory");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--seed", f.seed, "Noise seed");
    cmd->add_option("--sigma", f.sigma, "Noise standard deviation")->check(CLI::NonNegativeNumber);
    cmd->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

void load_config(const CommonFlags& f, Config& cfg) {
    if (f.config.empty()) check(cpdm_config_new(&cfg.p));
    else check(cpdm_config_load(f.config.c_str(), &cfg.p));
    if (f.sigma) check(cpdm_config_set_sigma(cfg.p, *f.sigma));
    if (f.seed) check(cpdm_config_set_seed(cfg.p, *f.seed));
    if (!f.out.empty()) check(cpdm_config_set_out_dir(cfg.p, f.out.c_str()));
    check(cpdm_config_validate(cfg.p));
}

std::string out_dir(const Config& cfg) {
    LibString j;
    check(cpdm_config_to_json(cfg.p, &j.p));
    return nlohmann::json::parse(j.str()).at("out_dir").get<std::string>();
}

const std::string& single_scene(const CommonFlags& f) {
    if (f.scenes.size() != 1) throw CliError{kExitInput, "exactly one --scene is required"};
    return f.scenes.front();
}

int cmd_simulate(const CommonFlags& f) {
    Config cfg;
    load_config(f, cfg);
    const fs::path dir = out_dir(cfg);
    Cube gt;
    check(cpdm_cube_load_scene(single_scene(f).c_str(), cfg.p, &gt.p));
    Mosaic m;
    check(cpdm_mosaic_simulate(gt.p, cfg.p, &m.p));
    check(cpdm_mosaic_save(m.p, (dir / "mosaic.png").string().c_str()));
    check(cpdm_cube_save(gt.p, (dir / "gt").string().c_str()));
    std::cout << (dir / "mosaic.png").string() << "\n";
    return kExitOk;
}

int cmd_demosaic(const CommonFlags& f, const std::string& input) {
    Config cfg;
    load_config(f, cfg);
    const fs::path dir = out_dir(cfg);
    Mosaic m;
    check(cpdm_mosaic_load(input.c_str(), cfg.p, &m.p));
    check(cpdm_demosaic_write_all(m.p, cfg.p, dir.string().c_str()));
    if (f.scenes.empty()) return kExitOk;  // no ground truth: reconstructions only

    Cube gt;
    const std::string& scene = single_scene(f);
    check(cpdm_cube_load_scene(scene.c_str(), cfg.p, &gt.p));
    nlohmann::json reports = nlohmann::json::array();
    const std::pair<cpdm_method, const char*> methods[] = {{CPDM_METHOD_INITIAL, "initial"},
                                                           {CPDM_METHOD_BASE, "base"},
                                                           {CPDM_METHOD_SMOOTH, "smooth"},
                                                           {CPDM_METHOD_FUSED, "fused"}};
    for (const auto& [method, name] : methods) {
        Cube rec;
        check(cpdm_demosaic(m.p, cfg.p, method, &rec.p));
        LibString r;
        check(cpdm_evaluate(rec.p, gt.p, name, scene.c_str(), cfg.p, &r.p));
        reports.push_back(nlohmann::json::parse(r.str()));
    }
    const std::string text = reports.dump(2) + "\n";
    write_text(dir / "report.json", text);
    std::cout << text;
    return kExitOk;
}

int cmd_run(const CommonFlags& f) {
    Config cfg;
    load_config(f, cfg);
    std::vector<std::string> ids;
    for (const auto& s : f.scenes) {
        if (s != "suite") {
            ids.push_back(s);
            continue;
        }
        LibString suite;
        check(cpdm_suite_json(&suite.p));
        for (const auto& id : nlohmann::json::parse(suite.str())) ids.push_back(id.get<std::string>());
    }
    std::vector<const char*> ptrs;
    for (const auto& s : ids) ptrs.push_back(s.c_str());
    LibString bundle;
    std::size_t failures = 0;
    check(cpdm_run(ptrs.data(), ptrs.size(), cfg.p, f.jobs, &bundle.p, &failures));

    const auto j = nlohmann::json::parse(bundle.str());
    for (const auto& s : j["scenes"]) {
        if (!s["ok"].get<bool>()) {
            std::cerr << "scene " << s["scene"].get<std::string>() << " failed: "
                      << s["error"]["message"].get<std::string>() << "\n";
            continue;
        }
        for (const auto& r : s["reports"]) {
            std::printf("%-18s %-8s psnr %.4f  psnr_dop %.4f  mae %.4f deg\n", s["scene"].get<std::string>().c_str(),
                        r["method"].get<std::string>().c_str(), r["psnr_mean"].get<double>(),
                        r["psnr_dop"].get<double>(), r["mae_deg"].get<double>());
        }
    }
    return failures == 0 ? kExitOk : kExitInput;
}

int cmd_validate(const CommonFlags& f, bool self_test) {
    nlohmann::json grid = nlohmann::json::object();
    if (!f.config.empty()) {
        try {
            grid = nlohmann::json::parse(read_text(f.config));
        } catch (const nlohmann::json::exception& e) {
            throw CliError{kExitInput, std::string("grid is not valid JSON: ") + e.what()};
        }
    }
    if (f.seed) grid["seed"] = *f.seed;
    if (f.sigma) grid["eta"] = {*f.sigma};
    LibString summary;
    const cpdm_status st = cpdm_validate_uncertainty(grid.dump().c_str(), self_test ? 1 : 0, f.jobs, &summary.p);
    if (st != CPDM_OK && st != CPDM_ERR_VALIDATION) check(st);
    if (!f.out.empty()) write_text(fs::path(f.out) / "uncertainty.json", summary.str());
    std::cout << summary.str();
    if (st == CPDM_ERR_VALIDATION) {
        std::cerr << cpdm_last_error() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}

int cmd_report(const CommonFlags& f, const std::vector<std::string>& bundles) {
    std::vector<std::string> texts;
    for (const auto& b : bundles) texts.push_back(read_text(b));
    std::vector<const char*> ptrs;
    for (const auto& t : texts) ptrs.push_back(t.c_str());
    LibString csv, md;
    check(cpdm_aggregate(ptrs.data(), ptrs.size(), &csv.p, &md.p));
    if (!f.out.empty()) {
        write_text(fs::path(f.out) / "table.csv", csv.str());
        write_text(fs::path(f.out) / "table.md", md.str());
    }
    std::cout << md.str();
    return kExitOk;
}

int cmd_dump_layout(const CommonFlags& f) {
    Config cfg;
    if (f.config.empty()) check(cpdm_config_new(&cfg.p));
    else check(cpdm_config_load(f.config.c_str(), &cfg.p));
    LibString layout;
    check(cpdm_layout_json(cfg.p, &layout.p));
    std::cout << layout.str();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Color polarization demosaicking harness"};
    app.set_version_flag("--version", std::string(cpdm_version()));
    app.require_subcommand(1);

    CommonFlags flags;
    std::string input;
    bool self_test = false;
    std::vector<std::string> bundles;

    auto* simulate = app.add_subcommand("simulate", "Sample a scene through the CPFA and add noise");
    add_common(simulate, flags);
    auto* demosaic = app.add_subcommand("demosaic", "Reconstruct a raw mosaic PNG");
    add_common(demosaic, flags);
    demosaic->add_option("--input", input, "Mosaic PNG")->required();
    auto* run = app.add_subcommand("run", "Full pipeline over scenes (\"suite\" expands to the benchmark set)");
    add_common(run, flags);
    auto* validate = app.add_subcommand("validate-uncertainty", "Monte-Carlo check of the DOP noise model");
    add_common(validate, flags, false);
    validate->add_flag("--self-test", self_test, "Use the wrong noise scale; the check must detect it");
    auto* report = app.add_subcommand("report", "Aggregate report bundles into CSV and markdown tables");
    add_common(report, flags, false);
    report->add_option("bundles", bundles, "report.json files")->required();
    auto* dump = app.add_subcommand("dump-layout", "Print the sensor layout as JSON");
    dump->add_option("--config", flags.config, "JSON config file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*simulate) return cmd_simulate(flags);
        if (*demosaic) return cmd_demosaic(flags, input);
        if (*run) return cmd_run(flags);
        if (*validate) return cmd_validate(flags, self_test);
        if (*report) return cmd_report(flags, bundles);
        if (*dump) return cmd_dump_layout(flags);
    } catch (const CliError& e) {
        std::cerr << "cpdm: " << e.message << "\n";
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "cpdm: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
