#ifndef FFDC_FFDC_H
#define FFDC_FFDC_H

/* C interface to the fixed-effects dynamic demand toolkit.
 *
 * Every object is an opaque handle released with its *_free function. Calls
 * return an ffdc_status; on failure ffdc_last_error() describes the problem
 * (the message is per thread and valid until the next failing call). */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(FFDC_BUILDING_LIBRARY)
#    define FFDC_API __declspec(dllexport)
#  else
#    define FFDC_API __declspec(dllimport)
#  endif
#else
#  define FFDC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ffdc_status {
  FFDC_OK = 0,
  FFDC_ERR_VALIDATION = 1,     /* bad config, process file or dataset */
  FFDC_ERR_VERIFICATION = 2,   /* an identity failed in ffdc_verify */
  FFDC_ERR_NONCONVERGENCE = 3, /* value iteration or Newton did not converge */
  FFDC_ERR_IDENTIFICATION = 4, /* matched data do not load on some component */
  FFDC_ERR_DOMAIN = 5,         /* function evaluated outside its domain */
  FFDC_ERR_ARGUMENT = 6,       /* null handle, index out of range, ... */
  FFDC_ERR_IO = 7,
  FFDC_ERR_INTERNAL = 8
} ffdc_status;

typedef struct ffdc_config ffdc_config;
typedef struct ffdc_dataset ffdc_dataset;
typedef struct ffdc_report ffdc_report;
typedef struct ffdc_estimate ffdc_estimate;
typedef struct ffdc_solution ffdc_solution;

FFDC_API const char* ffdc_version(void);
FFDC_API const char* ffdc_last_error(void);
FFDC_API const char* ffdc_status_name(ffdc_status status);

/* ---- configuration ---------------------------------------------------- */
FFDC_API ffdc_status ffdc_config_load(const char* path, ffdc_config** out);
/* base_dir resolves relative file references; NULL means the working directory. */
FFDC_API ffdc_status ffdc_config_parse(const char* json_text, const char* base_dir,
                                       ffdc_config** out);
FFDC_API ffdc_status ffdc_config_set_seed(ffdc_config* cfg, uint64_t seed);
FFDC_API ffdc_status ffdc_config_set_threads(ffdc_config* cfg, int threads);
FFDC_API uint64_t ffdc_config_hash(const ffdc_config* cfg);
FFDC_API void ffdc_config_free(ffdc_config* cfg);

/* ---- datasets --------------------------------------------------------- */
/* Simulates the configured panel. out_dir may be NULL (nothing written);
 * out may be NULL when only the files are wanted. */
FFDC_API ffdc_status ffdc_simulate(const ffdc_config* cfg, const char* out_dir, ffdc_dataset** out);
FFDC_API ffdc_status ffdc_dataset_load(const char* consumers_csv, const char* panel_csv,
                                       ffdc_dataset** out);
/* Dataset named by the config's estimate block. */
FFDC_API ffdc_status ffdc_dataset_from_config(const ffdc_config* cfg, ffdc_dataset** out);
FFDC_API int ffdc_dataset_num_consumers(const ffdc_dataset* data);
FFDC_API int ffdc_dataset_num_periods(const ffdc_dataset* data);
FFDC_API int ffdc_dataset_num_products(const ffdc_dataset* data);
/* Choice of consumer i (0-based) in period t (0-based). */
FFDC_API ffdc_status ffdc_dataset_choice(const ffdc_dataset* data, int i, int t, int* out);
FFDC_API ffdc_status ffdc_dataset_write(const ffdc_dataset* data, const char* consumers_csv,
                                        const char* panel_csv);
FFDC_API void ffdc_dataset_free(ffdc_dataset* data);

/* ---- reports (verify, detect-dstar) ------------------------------------ */
/* Returns FFDC_ERR_VERIFICATION when some identity fails; the report is
 * still produced. */
FFDC_API ffdc_status ffdc_verify(const ffdc_config* cfg, ffdc_report** out);
/* data == NULL: exact profile from the first population type. */
FFDC_API ffdc_status ffdc_detect_dstar(const ffdc_config* cfg, const ffdc_dataset* data,
                                       ffdc_report** out);
FFDC_API int ffdc_report_passed(const ffdc_report* report);
FFDC_API int ffdc_report_num_checks(const ffdc_report* report);
FFDC_API int ffdc_report_num_failures(const ffdc_report* report);
FFDC_API const char* ffdc_report_text(const ffdc_report* report);
FFDC_API const char* ffdc_report_json(const ffdc_report* report);
/* Detected caps (detect-dstar reports only). -1 when none was detected. */
FFDC_API ffdc_status ffdc_report_cap(const ffdc_report* report, int product, int* out);
FFDC_API void ffdc_report_free(ffdc_report* report);

/* ---- estimation ------------------------------------------------------- */
FFDC_API ffdc_status ffdc_estimate_run(const ffdc_config* cfg, const ffdc_dataset* data,
                                       ffdc_estimate** out);
FFDC_API int ffdc_estimate_dimension(const ffdc_estimate* est);
FFDC_API const char* ffdc_estimate_component_name(const ffdc_estimate* est, int index);
FFDC_API ffdc_status ffdc_estimate_theta(const ffdc_estimate* est, double* out, size_t n);
FFDC_API ffdc_status ffdc_estimate_std_errors(const ffdc_estimate* est, double* out, size_t n);
/* Row-major dimension x dimension. */
FFDC_API ffdc_status ffdc_estimate_covariance(const ffdc_estimate* est, double* out, size_t n);
FFDC_API double ffdc_estimate_loglik(const ffdc_estimate* est);
FFDC_API int ffdc_estimate_iterations(const ffdc_estimate* est);
FFDC_API const char* ffdc_estimate_json(const ffdc_estimate* est);
FFDC_API const char* ffdc_estimate_table(const ffdc_estimate* est);
FFDC_API ffdc_status ffdc_estimate_write(const ffdc_estimate* est, const char* path);
FFDC_API void ffdc_estimate_free(ffdc_estimate* est);

/* ---- value functions -------------------------------------------------- */
FFDC_API ffdc_status ffdc_solve(const ffdc_config* cfg, int type_index, ffdc_solution** out);
FFDC_API int ffdc_solution_iterations(const ffdc_solution* sol);
FFDC_API double ffdc_solution_residual(const ffdc_solution* sol);
/* l in 1..J, d in 1..D, z 0-based state id. */
FFDC_API ffdc_status ffdc_solution_v(const ffdc_solution* sol, int l, int d, int z, double* out);
/* e_index 0-based position among the transitory support points of z. */
FFDC_API ffdc_status ffdc_solution_ccp(const ffdc_solution* sol, int l, int d, int z, int e_index,
                                       int choice, double* out);
FFDC_API ffdc_status ffdc_solution_write(const ffdc_solution* sol, const char* path);
FFDC_API void ffdc_solution_free(ffdc_solution* sol);

#ifdef __cplusplus
}
#endif

#endif
