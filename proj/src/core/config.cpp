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
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cpdm/error.hpp"
#include "cpdm/harness.hpp"

namespace cpdm {

using nlohmann::json;

namespace {

const char* source_name(UncertaintySource s) { return s == UncertaintySource::Propagated ? "propagated" : "residual"; }

UncertaintySource parse_source(const std::string& s) {
    if (s == "propagated") return UncertaintySource::Propagated;
    if (s == "residual") return UncertaintySource::Residual;
    fail(ErrorKind::Config, "uncertainty.source must be 'propagated' or 'residual', got '" + s + "'");
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Input, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void reject_unknown(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
    for (const auto& [k, _] : obj.items()) {
        bool known = false;
        for (const char* key : keys) known = known || k == key;
        if (!known) fail(ErrorKind::Config, "unknown config key '" + where + k + "'");
    }
}

template <typename T>
void read_field(const json& obj, const char* key, T& dst, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        dst = obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail(ErrorKind::Config, "config key '" + where + key + "' has the wrong type");
    }
}

}  // namespace

double RunConfig::noise_sigma() const {
    if (!sigma) fail(ErrorKind::Config, "noise sigma is required (set noise.sigma or pass --sigma)");
    return *sigma;
}

void RunConfig::validate() const {
    const double s = noise_sigma();
    if (!(s >= 0.0) || !std::isfinite(s)) fail(ErrorKind::Config, "noise.sigma must be a finite value >= 0");
    if (!(branch.lambda_b >= 0.0) || !std::isfinite(branch.lambda_b)) {
        fail(ErrorKind::Config, "branch.lambda_b must be a finite value >= 0");
    }
    if (!(branch.sigma_r >= 0.0) || branch.sigma_r > 64.0) fail(ErrorKind::Config, "branch.sigma_r must lie in [0, 64]");
    if (residual_window % 2 == 0 || residual_window < 1) fail(ErrorKind::Config, "uncertainty.window must be odd");
    if (!(lo_pct >= 0.0 && hi_pct <= 100.0 && lo_pct < hi_pct)) {
        fail(ErrorKind::Config, "normalization percentiles must satisfy 0 <= lo_pct < hi_pct <= 100");
    }
    if (!(eps > 0.0)) fail(ErrorKind::Config, "eps must be positive");
    if (scene_size < 16 || scene_size % 4 != 0) fail(ErrorKind::Config, "scene_size must be a multiple of 4, >= 16");
    if (residual_window > scene_size) fail(ErrorKind::Config, "uncertainty.window exceeds scene_size");
    if (layout.empty()) fail(ErrorKind::Config, "layout must be 'default' or a file path");
}

std::string RunConfig::to_json(bool include_out_dir) const {
    json j;
    j["layout"] = layout;
    j["noise"] = {{"sigma", sigma ? json(*sigma) : json(nullptr)}, {"seed", seed}};
    j["branch"] = {{"lambda_b", branch.lambda_b}, {"sigma_r", branch.sigma_r}};
    j["uncertainty"] = {{"source", source_name(source)},
                        {"window", residual_window},
                        {"nll_variant", to_string(nll)}};
    j["normalization"] = {{"lo_pct", lo_pct}, {"hi_pct", hi_pct}, {"per_color", per_color_weights},
                          {"scheme", "per-image"}};
    j["eps"] = eps;
    j["scene_size"] = scene_size;
    if (include_out_dir) j["out_dir"] = out_dir;
    return j.dump();
}

RunConfig RunConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) fail(ErrorKind::Config, "config must be a JSON object");
    reject_unknown(j, {"layout", "noise", "branch", "uncertainty", "normalization", "eps", "scene_size", "out_dir"}, "");
    RunConfig c;
    read_field(j, "layout", c.layout, "");
    read_field(j, "eps", c.eps, "");
    read_field(j, "scene_size", c.scene_size, "");
    read_field(j, "out_dir", c.out_dir, "");
    if (j.contains("noise")) {
        const json& n = j["noise"];
        reject_unknown(n, {"sigma", "seed"}, "noise.");
        if (n.contains("sigma") && !n["sigma"].is_null()) {
            double s = 0.0;
            read_field(n, "sigma", s, "noise.");
            c.sigma = s;
        }
        read_field(n, "seed", c.seed, "noise.");
    }
    if (j.contains("branch")) {
        const json& b = j["branch"];
        reject_unknown(b, {"lambda_b", "sigma_r"}, "branch.");
        read_field(b, "lambda_b", c.branch.lambda_b, "branch.");
        read_field(b, "sigma_r", c.branch.sigma_r, "branch.");
    }
    if (j.contains("uncertainty")) {
        const json& u = j["uncertainty"];
        reject_unknown(u, {"source", "window", "nll_variant"}, "uncertainty.");
        std::string src = source_name(c.source), var = to_string(c.nll);
        read_field(u, "source", src, "uncertainty.");
        read_field(u, "window", c.residual_window, "uncertainty.");
        read_field(u, "nll_variant", var, "uncertainty.");
        c.source = parse_source(src);
        c.nll = parse_nll_variant(var);
    }
    if (j.contains("normalization")) {
        const json& n = j["normalization"];
        reject_unknown(n, {"lo_pct", "hi_pct", "per_color", "scheme"}, "normalization.");
        read_field(n, "lo_pct", c.lo_pct, "normalization.");
        read_field(n, "hi_pct", c.hi_pct, "normalization.");
        read_field(n, "per_color", c.per_color_weights, "normalization.");
        if (n.contains("scheme") && n["scheme"] != "per-image") {
            fail(ErrorKind::Config, "normalization.scheme: only 'per-image' is supported");
        }
    }
    return c;
}

CpfaLayout RunConfig::resolve_layout() const {
    if (layout == "default") return default_layout();
    return CpfaLayout::from_json(read_text(layout));
}

std::string RunConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    const auto mix = [&h](const std::string& s) {
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 0x100000001b3ull;
        }
    };
    mix(to_json(false));
    mix(resolve_layout().to_json());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

}  // namespace cpdm
