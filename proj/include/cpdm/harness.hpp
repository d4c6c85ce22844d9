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
#include <optional>
#include <string>
#include <vector>

#include "cpdm/cpfa.hpp"
#include "cpdm/demosaic.hpp"
#include "cpdm/fusion.hpp"
#include "cpdm/metrics.hpp"
#include "cpdm/polar.hpp"
#include "cpdm/uncertainty.hpp"

namespace cpdm {

enum class UncertaintySource { Propagated, Residual };

struct RunConfig {
    std::string layout = "default";  // "default" or a path to a layout JSON file
    std::optional<double> sigma;  // required: no default noise level is assumed
    std::uint64_t seed = 1;
    BranchParams branch;
    UncertaintySource source = UncertaintySource::Propagated;
    std::size_t residual_window = 7;
    double lo_pct = 1.0;
    double hi_pct = 99.0;
    bool per_color_weights = false;
    NllVariant nll = NllVariant::Paper2s;
    double eps = kDefaultDopEps;
    std::size_t scene_size = 256;
    std::string out_dir = "out";

    /// Throws a config error on the first invalid field.
    void validate() const;
    /// Canonical JSON with sorted keys. out_dir is omitted unless requested so that bundles written
    /// to different directories stay byte-identical.
    std::string to_json(bool include_out_dir = false) const;
    /// FNV-1a 64 (hex) of the canonical JSON plus the resolved layout codes.
    std::string hash() const;
    double noise_sigma() const;
    /// Reads a config; missing keys keep their defaults, unknown keys are rejected.
    static RunConfig from_json(const std::string& text);

    CpfaLayout resolve_layout() const;
};

struct SceneDescriptor {
    std::string id;
    std::string directory;   // set for on-disk scenes
    std::string generator;   // set for procedural scenes
    std::uint64_t seed = 0;
    std::size_t size = 256;
};

/// "name", "name@seed" or a directory path.
SceneDescriptor parse_scene(const std::string& spec, std::size_t size);

std::vector<std::string> procedural_generators();
/// The shipped benchmark suite of procedural scenes.
std::vector<std::string> default_suite();

PolarCube generate_scene(const std::string& generator, std::size_t size, std::uint64_t seed);
PolarCube ingest_scene(const SceneDescriptor& desc);

namespace png {

struct Image {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;  // 1 or 3
    int bit_depth = 16;
    std::vector<double> data;  // interleaved, normalized to [0, 1]
    std::vector<std::pair<std::string, std::string>> text;  // tEXt chunks
};

Image read(const std::string& path);
/// Values are clamped to [0, 1] and quantized to 16 bits.
void write16(const std::string& path, const Image& img);

}  // namespace png

/// Writes dir/{000,045,090,135}/rgb.png, the layout ingest_scene reads back.
void write_cube(const PolarCube& cube, const std::string& dir, const std::string& config_hash = {});
void write_mosaic(const CpfaMosaic& m, const std::string& path, const std::string& config_hash = {});
CpfaMosaic read_mosaic(const std::string& path, const CpfaLayout& layout);

struct Reconstructions {
    PolarCube initial, base, smooth, fused;
    FusionWeights weights;
    std::array<FusionWeights, 3> color_weights;
};

/// Demosaic a mosaic through every branch and the uncertainty-guided fusion.
Reconstructions reconstruct_all(const CpfaMosaic& m, const RunConfig& cfg);

/// Writes dir/{initial,base,smooth,fused}/ (cube, dop.png, aop.png) and dir/s_bar.png.
void write_reconstructions(const Reconstructions& rec, const std::string& dir, const std::string& config_hash = {});

struct SceneResult {
    std::string scene;
    bool ok = false;
    std::string error;
    std::string error_kind;
    std::vector<MetricsReport> reports;
    FusionWeights weights;
};

/// Simulate, reconstruct, fuse and evaluate one scene; writes images under out_dir/<scene>.
SceneResult run_scene(const std::string& scene_spec, const RunConfig& cfg);

/// Runs scenes on up to `jobs` threads; writes out_dir/report.json and returns its contents.
std::string run_pipeline(const std::vector<std::string>& scenes, const RunConfig& cfg, unsigned jobs,
                         std::size_t* failures = nullptr);

struct ValidationGrid {
    std::vector<double> dop_true{0.0, 0.3, 0.7};
    std::vector<double> eta{0.01, 0.02};
    std::vector<double> s0{1.0};
    double aop_true = 0.0;
    std::size_t n_samples = 100000;
    std::uint64_t seed = 1;
    double ks_tol = 0.01;
    double moment_tol = 0.02;
    double negative_control_min_ks = 0.05;
    bool self_test = false;  // compare against the wrong scale eta instead of sqrt(2) eta / s0

    static ValidationGrid from_json(const std::string& text);
};

/// Runs the Monte-Carlo grid; returns the JSON summary table and sets passed.
std::string validate_uncertainty(const ValidationGrid& grid, bool& passed, unsigned jobs = 1);

/// Aggregates report bundles into a CSV table and a markdown table. Mismatched config hashes are rejected.
struct AggregateTables {
    std::string csv;
    std::string markdown;
};
AggregateTables aggregate_reports(const std::vector<std::string>& bundle_jsons);

std::string metrics_to_json(const MetricsReport& r);

}  // namespace cpdm
