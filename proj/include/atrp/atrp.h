/* C interface to the ATRP reserving engine.
 *
 * Objects are opaque handles created by the library and released with the
 * matching *_free function. Every fallible call returns an atrp_status; on
 * failure atrp_last_error() describes the problem for the calling thread.
 */
#ifndef ATRP_H
#define ATRP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(ATRP_BUILDING)
#    define ATRP_API __declspec(dllexport)
#  else
#    define ATRP_API __declspec(dllimport)
#  endif
#else
#  define ATRP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum atrp_status {
    ATRP_OK = 0,
    ATRP_ERR_INVALID_ARGUMENT = 1,
    ATRP_ERR_DOMAIN = 2,
    ATRP_ERR_PARSE = 3,
    ATRP_ERR_IO = 4,
    ATRP_ERR_CONVERGENCE = 5,
    ATRP_ERR_DEGENERATE_WINDOW = 6,
    ATRP_ERR_UNSUPPORTED = 7,
    ATRP_ERR_SATURATION = 8,
    ATRP_ERR_DIVERGENCE = 9,
    ATRP_ERR_UNDEFINED_RATIO = 10,
    ATRP_ERR_INTERNAL = 11
} atrp_status;

/* Tasks for atrp_run, combined with bitwise or. */
#define ATRP_TASK_RESERVE 0x01u
#define ATRP_TASK_SIMULATE 0x02u
#define ATRP_TASK_IBNR 0x04u
#define ATRP_TASK_UPR 0x08u
#define ATRP_TASK_BOOTSTRAP 0x10u
#define ATRP_TASK_TRP_SETTLEMENT 0x20u

typedef struct atrp_config atrp_config;
typedef struct atrp_claims atrp_claims;
typedef struct atrp_bundle atrp_bundle;
typedef struct atrp_report atrp_report;

ATRP_API const char* atrp_version(void);
/* Stable snake_case category, e.g. "parse" or "undefined_ratio". */
ATRP_API const char* atrp_status_name(atrp_status status);
/* Message of the last failed call on this thread; empty after success. */
ATRP_API const char* atrp_last_error(void);
ATRP_API void atrp_string_free(char* s);

/* Scenario configuration (JSON with explicit units). */
ATRP_API atrp_status atrp_config_load(const char* path, atrp_config** out);
ATRP_API atrp_status atrp_config_parse(const char* json_text, atrp_config** out);
ATRP_API atrp_status atrp_config_set_seed(atrp_config* cfg, uint64_t seed);
ATRP_API atrp_status atrp_config_set_sims(atrp_config* cfg, size_t sims);
ATRP_API atrp_status atrp_config_set_workers(atrp_config* cfg, unsigned workers);
ATRP_API atrp_status atrp_config_to_json(const atrp_config* cfg, char** out);
ATRP_API void atrp_config_free(atrp_config* cfg);

/* Claims file; the ingestion options come from cfg (may be NULL for defaults). */
ATRP_API atrp_status atrp_claims_load(const char* path, const atrp_config* cfg, atrp_claims** out);
ATRP_API size_t atrp_claims_count(const atrp_claims* claims);
ATRP_API size_t atrp_claims_rejected_count(const atrp_claims* claims);
/* Line number and reason of rejected row k; the reason stays valid while claims lives. */
ATRP_API atrp_status atrp_claims_rejected_row(const atrp_claims* claims, size_t k, size_t* line, const char** reason);
ATRP_API void atrp_claims_free(atrp_claims* claims);

/* Fitted model bundle. */
ATRP_API atrp_status atrp_calibrate(const atrp_claims* claims, const atrp_config* cfg, atrp_bundle** out);
ATRP_API atrp_status atrp_bundle_load(const char* path, atrp_bundle** out);
ATRP_API atrp_status atrp_bundle_save(const atrp_bundle* bundle, const char* path);
ATRP_API void atrp_bundle_free(atrp_bundle* bundle);

/* Runs the tasks at every grid point. claims or bundle may be NULL but not both. */
ATRP_API atrp_status atrp_run(const atrp_config* cfg, const atrp_claims* claims, const atrp_bundle* bundle,
                              unsigned tasks, atrp_report** out);
ATRP_API atrp_status atrp_report_load(const char* path, atrp_report** out);
/* format: "json", "text" or "csv" (csv writes a directory). */
ATRP_API atrp_status atrp_report_write(const atrp_report* report, const char* format, const char* path);
ATRP_API atrp_status atrp_report_to_json(const atrp_report* report, char** out);
ATRP_API atrp_status atrp_report_to_text(const atrp_report* report, char** out);
ATRP_API void atrp_report_free(atrp_report* report);

/* Numerical entry points. */
ATRP_API atrp_status atrp_risk_measures(const double* sample, size_t n, const double* levels, size_t n_levels,
                                        double* var, double* tvar, double* mean, double* sd);
ATRP_API atrp_status atrp_risk_capital(const double* sample, size_t n, double* out);
ATRP_API atrp_status atrp_mape(double estimate, double truth, double* out);
/* Cumulative triangle, row-major t x t; entries with i + j > t - 1 (0-based) are ignored. */
ATRP_API atrp_status atrp_chain_ladder(const double* cumulative, size_t t, double* reserve, double* standard_error);
ATRP_API atrp_status atrp_gg_cdf(double a, double b, double c, double x, double* out);

#ifdef __cplusplus
}
#endif

#endif /* ATRP_H */
