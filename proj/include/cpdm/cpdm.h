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
#ifndef CPDM_H
#define CPDM_H

/*
 * C interface to the color-polarization demosaicking library.
 *
 * Objects are opaque handles released with their matching *_free function.
 * Every call returns a cpdm_status; on failure cpdm_last_error() describes the
 * problem (thread-local, valid until the next call on the same thread).
 * Strings returned through char** out-parameters are owned by the caller and
 * must be released with cpdm_string_free().
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(CPDM_BUILDING)
#    define CPDM_API __declspec(dllexport)
#  else
#    define CPDM_API __declspec(dllimport)
#  endif
#else
#  define CPDM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cpdm_status {
    CPDM_OK = 0,
    CPDM_ERR_ARGUMENT = 1,   /* null pointer or out-of-range enum */
    CPDM_ERR_STRUCTURAL = 2, /* dimension or layout mismatch */
    CPDM_ERR_DOMAIN = 3,     /* value outside an operation's domain */
    CPDM_ERR_CONFIG = 4,
    CPDM_ERR_INPUT = 5,      /* unreadable or malformed input file */
    CPDM_ERR_IO = 6,
    CPDM_ERR_VALIDATION = 7, /* a check ran and did not hold */
    CPDM_ERR_INTERNAL = 8
} cpdm_status;

typedef enum cpdm_method {
    CPDM_METHOD_INITIAL = 0,
    CPDM_METHOD_BASE = 1,
    CPDM_METHOD_SMOOTH = 2,
    CPDM_METHOD_FUSED = 3
} cpdm_method;

typedef enum cpdm_nll_variant {
    CPDM_NLL_PAPER_2S = 0,
    CPDM_NLL_DIRECT_S = 1
} cpdm_nll_variant;

typedef struct cpdm_config cpdm_config;
typedef struct cpdm_cube cpdm_cube;
typedef struct cpdm_mosaic cpdm_mosaic;

CPDM_API const char* cpdm_version(void);
CPDM_API const char* cpdm_last_error(void);
CPDM_API const char* cpdm_status_name(cpdm_status status);
CPDM_API void cpdm_string_free(char* str);

/* Run configuration. A fresh config has no noise sigma; set one before running. */
CPDM_API cpdm_status cpdm_config_new(cpdm_config** out);
CPDM_API cpdm_status cpdm_config_from_json(const char* json, cpdm_config** out);
CPDM_API cpdm_status cpdm_config_load(const char* path, cpdm_config** out);
CPDM_API cpdm_status cpdm_config_set_sigma(cpdm_config* cfg, double sigma);
CPDM_API cpdm_status cpdm_config_set_seed(cpdm_config* cfg, uint64_t seed);
CPDM_API cpdm_status cpdm_config_set_out_dir(cpdm_config* cfg, const char* dir);
CPDM_API cpdm_status cpdm_config_validate(const cpdm_config* cfg);
CPDM_API cpdm_status cpdm_config_to_json(const cpdm_config* cfg, char** out);
CPDM_API cpdm_status cpdm_config_hash(const cpdm_config* cfg, char** out);
CPDM_API void cpdm_config_free(cpdm_config* cfg);

/* Layout of the configured sensor (or the built-in default) as a 4x4 JSON array of codes. */
CPDM_API cpdm_status cpdm_layout_json(const cpdm_config* cfg, char** out);
/* JSON array of the procedural scenes in the shipped benchmark suite. */
CPDM_API cpdm_status cpdm_suite_json(char** out);

/* 12-plane cubes. angle_deg is one of 0, 45, 90, 135; color is 'R', 'G' or 'B'. */
CPDM_API cpdm_status cpdm_cube_new(size_t height, size_t width, cpdm_cube** out);
/* Loads a procedural scene id ("name" or "name@seed") or a scene directory. */
CPDM_API cpdm_status cpdm_cube_load_scene(const char* scene, const cpdm_config* cfg, cpdm_cube** out);
CPDM_API cpdm_status cpdm_cube_dims(const cpdm_cube* cube, size_t* height, size_t* width);
CPDM_API cpdm_status cpdm_cube_plane(cpdm_cube* cube, int angle_deg, char color, double** data);
CPDM_API cpdm_status cpdm_cube_plane_const(const cpdm_cube* cube, int angle_deg, char color, const double** data);
/* Per-pixel Stokes outputs for one color into caller buffers of height*width doubles (any may be NULL). */
CPDM_API cpdm_status cpdm_cube_stokes(const cpdm_cube* cube, char color, double* s0, double* s1, double* s2,
                                      double* dop, double* aop);
CPDM_API cpdm_status cpdm_cube_save(const cpdm_cube* cube, const char* dir);
CPDM_API void cpdm_cube_free(cpdm_cube* cube);

/* Raw sensor mosaics. */
CPDM_API cpdm_status cpdm_mosaic_simulate(const cpdm_cube* cube, const cpdm_config* cfg, cpdm_mosaic** out);
CPDM_API cpdm_status cpdm_mosaic_load(const char* png_path, const cpdm_config* cfg, cpdm_mosaic** out);
CPDM_API cpdm_status cpdm_mosaic_save(const cpdm_mosaic* m, const char* png_path);
CPDM_API cpdm_status cpdm_mosaic_dims(const cpdm_mosaic* m, size_t* height, size_t* width);
CPDM_API cpdm_status cpdm_mosaic_data(const cpdm_mosaic* m, const double** data);
CPDM_API void cpdm_mosaic_free(cpdm_mosaic* m);

CPDM_API cpdm_status cpdm_demosaic(const cpdm_mosaic* m, const cpdm_config* cfg, cpdm_method method,
                                   cpdm_cube** out);
/* Writes every reconstruction, DOP/AOP renderings and the fusion weight map under out_dir. */
CPDM_API cpdm_status cpdm_demosaic_write_all(const cpdm_mosaic* m, const cpdm_config* cfg, const char* out_dir);

/* Metric report (JSON object) of recon against ground truth. */
CPDM_API cpdm_status cpdm_evaluate(const cpdm_cube* recon, const cpdm_cube* gt, const char* method,
                                   const char* scene, const cpdm_config* cfg, char** report_json);

/* Full pipeline over scenes; writes images and out_dir/report.json. failures may be NULL. */
CPDM_API cpdm_status cpdm_run(const char* const* scenes, size_t n_scenes, const cpdm_config* cfg, unsigned jobs,
                              char** bundle_json, size_t* failures);

/* Monte-Carlo validation of the DOP distribution. grid_json may be NULL for the default grid.
   Returns CPDM_ERR_VALIDATION (with the summary still filled) when a tolerance is violated. */
CPDM_API cpdm_status cpdm_validate_uncertainty(const char* grid_json, int self_test, unsigned jobs,
                                               char** summary_json);

/* Aggregates report bundles; CPDM_ERR_VALIDATION when their config hashes differ. */
CPDM_API cpdm_status cpdm_aggregate(const char* const* bundle_jsons, size_t n, char** csv, char** markdown);

/* Scalar numerics. */
CPDM_API cpdm_status cpdm_rice_pdf(double phi, double nu, double sigma, double* out);
CPDM_API cpdm_status cpdm_rice_pdf_approx(double phi, double nu, double sigma, double* out);
CPDM_API cpdm_status cpdm_propagate_eta_p(double eta, double s0, double eps, double* eta_p);
CPDM_API cpdm_status cpdm_mle_eta_p(const double* residuals, size_t n, cpdm_nll_variant variant, double* eta_p,
                                    int* degenerate);

#ifdef __cplusplus
}
#endif

#endif
