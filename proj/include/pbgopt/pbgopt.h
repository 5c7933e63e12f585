/* C interface to the photonic band-gap optimizer. */
#ifndef PBGOPT_PBGOPT_H
#define PBGOPT_PBGOPT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PBG_BUILDING_LIBRARY)
#    define PBG_API __declspec(dllexport)
#  else
#    define PBG_API __declspec(dllimport)
#  endif
#else
#  define PBG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct pbg_config pbg_config;
typedef struct pbg_result pbg_result;

typedef enum pbg_status {
  PBG_OK = 0,
  PBG_ERR_CONFIG = 1,      /* bad key, value, constraint or unreadable input file */
  PBG_ERR_NUMERICAL = 2,   /* eigensolver or SDP failure */
  PBG_ERR_INVALID_ARGUMENT = 3,
  PBG_ERR_IO = 4,          /* output could not be written */
  PBG_ERR_INTERNAL = 5
} pbg_status;

typedef enum pbg_termination {
  PBG_TERM_CONVERGED = 0,
  PBG_TERM_MAX_OUTER = 1,
  PBG_TERM_SOLVER_FAILURE = 2,
  PBG_TERM_NONE = 3        /* band computations */
} pbg_termination;

/* pbg_run_optimize flags */
#define PBG_DUMP_SDP 0x1u

typedef void (*pbg_log_fn)(const char* line, void* user);

typedef struct pbg_iteration {
  int iteration;
  double gap_midgap;
  double lambda_lower;
  double lambda_upper;
  double incumbent_objective;
  double surrogate_objective;
  double step_norm;
  double clamp;
  double wall_seconds;
  int solver_iterations;
  int solver_status; /* 0 optimal, 1 near-optimal, 2 infeasible, 3 unbounded, 4 failure */
} pbg_iteration;

PBG_API const char* pbg_version(void);

/* Message for the last failing call on this thread; never NULL. */
PBG_API const char* pbg_last_error(void);

PBG_API pbg_status pbg_config_create(pbg_config** out);
PBG_API pbg_status pbg_config_parse_file(const char* path, pbg_config** out);
PBG_API pbg_status pbg_config_parse_string(const char* text, pbg_config** out);
/* Applies one key = value setting and revalidates; the config is unchanged on error. */
PBG_API pbg_status pbg_config_set(pbg_config* config, const char* key, const char* value);
/* Applies "key=value" assignments in order and validates once at the end, so settings
 * that depend on each other (init.kind = file and init.file) may come in any order.
 * All or nothing: the config is unchanged on error. */
PBG_API pbg_status pbg_config_apply(pbg_config* config, const char* const* assignments,
                                    size_t count);
/* "key = value" lines. Copies at most len - 1 bytes; *needed gets the full length + 1. */
PBG_API pbg_status pbg_config_format(const pbg_config* config, char* buf, size_t len,
                                     size_t* needed);
PBG_API void pbg_config_destroy(pbg_config* config);

/* Band diagram of the configured initial design. With a non-NULL output_dir (or, when
 * NULL, the configured output.dir) writes bands.csv, design.csv, bands.svg, design.svg
 * and summary.json. Pass output_dir = "" to skip writing. */
PBG_API pbg_status pbg_run_bands(const pbg_config* config, const char* output_dir,
                                 pbg_result** out);

/* Outer optimization (multi-restart when restarts > 1). Writes run.json, summary.json and
 * the final design artifacts. On solver failure returns PBG_ERR_NUMERICAL, still writes
 * best-so-far artifacts and still hands back the result. */
PBG_API pbg_status pbg_run_optimize(const pbg_config* config, const char* output_dir,
                                    unsigned flags, pbg_log_fn log, void* user,
                                    pbg_result** out);

PBG_API double pbg_result_gap_midgap(const pbg_result* result);
PBG_API double pbg_result_initial_gap_midgap(const pbg_result* result);
PBG_API double pbg_result_lambda_lower(const pbg_result* result);
PBG_API double pbg_result_lambda_upper(const pbg_result* result);
PBG_API pbg_termination pbg_result_termination(const pbg_result* result);
PBG_API size_t pbg_result_iteration_count(const pbg_result* result);
PBG_API pbg_status pbg_result_iteration(const pbg_result* result, size_t index,
                                        pbg_iteration* out);
PBG_API size_t pbg_result_k_count(const pbg_result* result);
PBG_API size_t pbg_result_band_count(const pbg_result* result);
/* Eigenvalue of band `band` (0-based) at k-point `k`. */
PBG_API pbg_status pbg_result_eigenvalue(const pbg_result* result, size_t k, size_t band,
                                         double* out);
/* Reduced design (one value per symmetry orbit). Copies min(len, size) values. */
PBG_API size_t pbg_result_design(const pbg_result* result, double* buf, size_t len);
PBG_API void pbg_result_destroy(pbg_result* result);

/* (upper - lower) / (upper + lower); NaN and PBG_ERR_INVALID_ARGUMENT for non-positive input. */
PBG_API pbg_status pbg_gap_midgap(double lambda_lower, double lambda_upper, double* out);

#ifdef __cplusplus
}
#endif

#endif /* PBGOPT_PBGOPT_H */
