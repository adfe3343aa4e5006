/* C interface to the slab transport solver and its DSA preconditioners.
 *
 * Every call returns an sd_status; on failure sd_last_error() holds a
 * message for the calling thread until its next failing call. Handles are
 * opaque and must be released with the matching *_free function. */
#ifndef SLABDSA_H
#define SLABDSA_H

#include <stddef.h>
#include <stdint.h>

#if defined(SLABDSA_BUILDING)
#define SD_API __attribute__((visibility("default")))
#else
#define SD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sd_status {
  SD_OK = 0,
  SD_ERR_INVALID_ARGUMENT = 1,
  SD_ERR_INVALID_COEFFICIENT = 2,
  SD_ERR_NUMERICAL_BREAKDOWN = 3,
  SD_ERR_FACTORIZATION = 4,
  SD_ERR_UNSUPPORTED_DEGREE = 5,
  SD_ERR_INVALID_INSTANCE = 6,
  SD_ERR_CONFIG = 7,
  SD_ERR_IO = 8,
  SD_ERR_INTERNAL = 9
} sd_status;

typedef struct sd_config sd_config;
typedef struct sd_result sd_result;
typedef struct sd_report sd_report;

SD_API const char* sd_version(void);
SD_API const char* sd_last_error(void);
SD_API const char* sd_status_name(sd_status s);

/* Configuration: starts from the paper-1d preset. */
SD_API sd_status sd_config_new(sd_config** out);
SD_API void sd_config_free(sd_config* cfg);
SD_API sd_status sd_config_preset(sd_config* cfg, const char* name);
SD_API sd_status sd_config_load(sd_config* cfg, const char* path);
SD_API sd_status sd_config_set(sd_config* cfg, const char* key, const char* value);
/* Copies the value (NUL-terminated) into buf. *needed receives the buffer size
 * required, including the terminator; buf may be NULL to query it. */
SD_API sd_status sd_config_get(const sd_config* cfg, const char* key, char* buf, size_t buf_len, size_t* needed);
SD_API sd_status sd_config_validate(const sd_config* cfg);

/* Runs one experiment. out_dir may be NULL or empty to skip file output. */
SD_API sd_status sd_run(const sd_config* cfg, const char* out_dir, sd_result** out);
SD_API void sd_result_free(sd_result* r);
SD_API int sd_result_iterations(const sd_result* r);
SD_API int sd_result_converged(const sd_result* r);
SD_API int sd_result_diverged(const sd_result* r);
SD_API double sd_result_final_error(const sd_result* r);
SD_API double sd_result_final_residual(const sd_result* r);
SD_API double sd_result_reference_error(const sd_result* r);
SD_API long sd_result_sweeps(const sd_result* r);
SD_API double sd_result_eta(const sd_result* r);
SD_API const char* sd_result_status(const sd_result* r);
SD_API sd_status sd_result_row(const sd_result* r, int i, double* error_inf, double* residual_inf,
                               long* cumulative_sweeps);

/* Scan over eps x preconditioner names. n_diverged (nullable) receives the
 * number of diverged cells, n_failed (nullable) the number of cells that
 * raised an error. */
SD_API sd_status sd_scan(const sd_config* base, const double* eps, size_t n_eps, const char* const* preconds,
                         size_t n_preconds, const char* out_dir, int* n_diverged, int* n_failed);

SD_API sd_status sd_dump(const sd_config* cfg, const char* dir);

/* Oracle suite. */
SD_API sd_status sd_verify(uint64_t seed, const char* out_dir, sd_report** out);
SD_API void sd_report_free(sd_report* r);
SD_API int sd_report_count(const sd_report* r);
SD_API int sd_report_all_pass(const sd_report* r);
SD_API sd_status sd_report_entry(const sd_report* r, int i, const char** name, double* measured, double* bound,
                                 double* bound_hi, int* pass);

#ifdef __cplusplus
}
#endif

#endif
