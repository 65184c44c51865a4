/* Copyright 2026 The lodem Authors
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

/* C interface to the lodem LOD tensor estimator.
 *
 * Every function returns a lodem_status. On failure the message is available
 * from lodem_last_error() on the same thread until the next call. Objects
 * returned through out-parameters are owned by the caller and released with
 * the matching *_free function; *_free accepts NULL.
 */

#ifndef LODEM_LODEM_H_
#define LODEM_LODEM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LODEM_API __declspec(dllexport)
#else
#define LODEM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lodem_status {
  LODEM_OK = 0,
  LODEM_NOT_CONVERGED = 1, /* results are still produced */
  LODEM_ERR_CONFIG = 2,
  LODEM_ERR_PARSE = 3,
  LODEM_ERR_INTEGRITY = 4,
  LODEM_ERR_IO = 5,
  LODEM_ERR_NUMERIC = 6,
  LODEM_ERR_ARGUMENT = 7,
  LODEM_ERR_INTERNAL = 8
} lodem_status;

typedef struct lodem_config lodem_config;
typedef struct lodem_network lodem_network;
typedef struct lodem_tensor lodem_tensor;
typedef struct lodem_counts lodem_counts;

LODEM_API const char* lodem_version(void);
LODEM_API const char* lodem_last_error(void);
LODEM_API const char* lodem_status_name(lodem_status status);

/* Run configuration */

LODEM_API lodem_status lodem_config_new(lodem_config** out);
LODEM_API lodem_status lodem_config_load(const char* path, lodem_config** out);
/* "key=value"; unknown keys are rejected. */
LODEM_API lodem_status lodem_config_set(lodem_config* config,
                                        const char* assignment);
LODEM_API void lodem_config_free(lodem_config* config);

/* Registered keys, index in [0, lodem_config_key_count()). */
LODEM_API size_t lodem_config_key_count(void);
LODEM_API lodem_status lodem_config_key(size_t index, const char** name,
                                        const char** default_value,
                                        const char** help);

/* "simplify", "match", "estimate", "simulate" or "evaluate". */
LODEM_API lodem_status lodem_run(const char* command,
                                 const lodem_config* config);

/* Data */

LODEM_API lodem_status lodem_network_load(const char* nodes_csv,
                                          const char* links_csv,
                                          const char* scanners_csv,
                                          lodem_network** out);
LODEM_API void lodem_network_free(lodem_network* network);
LODEM_API size_t lodem_network_scanner_count(const lodem_network* network);
LODEM_API size_t lodem_network_link_count(const lodem_network* network);

LODEM_API lodem_status lodem_tensor_load(const lodem_network* network,
                                         const char* path, lodem_tensor** out);
LODEM_API lodem_status lodem_tensor_save(const lodem_network* network,
                                         const lodem_tensor* tensor,
                                         const char* path);
LODEM_API void lodem_tensor_free(lodem_tensor* tensor);
LODEM_API size_t lodem_tensor_nnz(const lodem_tensor* tensor);
LODEM_API double lodem_tensor_sum(const lodem_tensor* tensor);

LODEM_API lodem_status lodem_counts_load(const lodem_network* network,
                                         const char* path, lodem_counts** out);
LODEM_API void lodem_counts_free(lodem_counts* counts);

/* Model and evaluation */

typedef struct lodem_weights {
  double tc, p, c, k, tv;
} lodem_weights;

LODEM_API void lodem_weights_default(lodem_weights* weights);

typedef struct lodem_objective {
  double f_tc, f_p, f_k, f_tv;
  size_t f_c_violations;
  double n_or, n_dest, eta, total_weighted;
} lodem_objective;

LODEM_API lodem_status lodem_penetration_rate(const lodem_tensor* b,
                                              const lodem_counts* counts,
                                              double* eta);
LODEM_API lodem_status lodem_naive_solution(const lodem_tensor* b, double eta,
                                            lodem_tensor** out);
LODEM_API lodem_status lodem_rmse(const lodem_tensor* estimate,
                                  const lodem_tensor* truth, double* out);
LODEM_API lodem_status lodem_totals(const lodem_network* network,
                                    const lodem_tensor* q, double* n_or,
                                    double* n_dest);
/* Similar scanners use the default 300 m decay and cutoff. */
LODEM_API lodem_status lodem_evaluate_objective(
    const lodem_network* network, const lodem_tensor* q, const lodem_tensor* b,
    const lodem_counts* counts, const lodem_weights* weights, double eta,
    lodem_objective* out);

/* Estimation */

typedef struct lodem_solve_options {
  lodem_weights weights;
  size_t max_iterations;
  double rms_tolerance;
  size_t check_interval;
  size_t k_paths;
  int full_support;
  uint64_t seed;
} lodem_solve_options;

typedef struct lodem_solve_info {
  int converged;
  size_t iterations;
  size_t support_size;
  double eta, tau, sigma;
  double initial_objective, final_objective;
} lodem_solve_info;

LODEM_API void lodem_solve_options_default(lodem_solve_options* options);
/* Returns LODEM_NOT_CONVERGED, with *out set, at the iteration limit. */
LODEM_API lodem_status lodem_estimate(const lodem_network* network,
                                      const lodem_tensor* b,
                                      const lodem_counts* counts,
                                      const lodem_solve_options* options,
                                      lodem_tensor** out,
                                      lodem_solve_info* info);

#ifdef __cplusplus
}
#endif

#endif /* LODEM_LODEM_H_ */
