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
/* Exercises the C interface from a C99 translation unit. */
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "cpdm/cpdm.h"

static int failures = 0;

#define EXPECT(cond)                                                  \
    do {                                                              \
        if (!(cond)) {                                                \
            fprintf(stderr, "%s:%d: %s failed (%s)\n", __FILE__, __LINE__, #cond, cpdm_last_error()); \
            ++failures;                                               \
        }                                                             \
    } while (0)

int main(void) {
    cpdm_config* cfg = NULL;
    cpdm_cube* gt = NULL;
    cpdm_cube* rec = NULL;
    cpdm_mosaic* m = NULL;
    char* report = NULL;
    double pdf = 0.0;
    size_t h = 0, w = 0;

    EXPECT(strcmp(cpdm_version(), "1.0.0") == 0);
    EXPECT(cpdm_config_from_json("{\"noise\": {\"sigma\": 0.01}, \"scene_size\": 32}", &cfg) == CPDM_OK);
    EXPECT(cpdm_cube_load_scene("malus-ramp", cfg, &gt) == CPDM_OK);
    EXPECT(cpdm_cube_dims(gt, &h, &w) == CPDM_OK && h == 32 && w == 32);
    EXPECT(cpdm_mosaic_simulate(gt, cfg, &m) == CPDM_OK);
    EXPECT(cpdm_demosaic(m, cfg, CPDM_METHOD_FUSED, &rec) == CPDM_OK);
    EXPECT(cpdm_evaluate(rec, gt, "fused", "malus-ramp", cfg, &report) == CPDM_OK);
    EXPECT(report != NULL && strstr(report, "psnr_dop") != NULL);
    cpdm_string_free(report);

    EXPECT(cpdm_rice_pdf(0.5, 0.5, 0.1, &pdf) == CPDM_OK && pdf > 0.0 && isfinite(pdf));
    EXPECT(cpdm_rice_pdf(0.5, 0.5, -1.0, &pdf) == CPDM_ERR_DOMAIN);
    EXPECT(strlen(cpdm_last_error()) > 0);
    EXPECT(cpdm_demosaic(NULL, cfg, CPDM_METHOD_BASE, &rec) == CPDM_ERR_ARGUMENT);

    cpdm_cube_free(rec);
    cpdm_mosaic_free(m);
    cpdm_cube_free(gt);
    cpdm_config_free(cfg);
    if (failures == 0) printf("c api: ok\n");
    return failures == 0 ? 0 : 1;
}
