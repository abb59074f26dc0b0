/* C interface to the mmlyap library.
 *
 * All strings returned through char** out-parameters are allocated by the
 * library and must be released with mml_string_free. A configuration handle
 * is immutable after parsing and may be shared between threads.
 */
#ifndef MMLYAP_H
#define MMLYAP_H

#include <stddef.h>
#include <stdint.h>

#if defined(MMLYAP_BUILDING)
#define MML_API __attribute__((visibility("default")))
#else
#define MML_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mml_status {
  MML_OK = 0,
  MML_FAILED = 1,           /* ran to completion, check did not pass */
  MML_ERR_PARSE = 2,        /* configuration text does not parse */
  MML_ERR_INVALID = 3,      /* bad arguments or malformed data */
  MML_ERR_DOMAIN = 4,       /* expression evaluated outside its domain */
  MML_ERR_PRECONDITION = 5, /* operation not applicable to this input */
  MML_ERR_COVERAGE = 6,     /* point outside every region */
  MML_ERR_INTERNAL = 7
} mml_status;

typedef struct mml_config mml_config;

typedef struct mml_policy {
  double abs;
  double rel;
  double margin;
  int directions;
  uint64_t seed;
} mml_policy;

MML_API const char* mml_version(void);
MML_API const char* mml_status_string(int status);
MML_API mml_policy mml_policy_default(void);
MML_API void mml_string_free(char* s);

/* "# mmlyap <version> manifest=<fnv1a> seed=<seed>" with the given comment prefix. */
MML_API char* mml_output_header(const char* manifest, uint64_t seed, const char* prefix);

/* On failure *out is NULL and *error (if non-NULL) holds a message, with line:col for parse errors. */
MML_API int mml_config_parse(const char* text, mml_config** out, char** error);
/* Bundled examples: "example1", "example2" (param = b), "example3". */
MML_API int mml_config_example(const char* name, double param, mml_config** out, char** error);
MML_API void mml_config_free(mml_config* cfg);
MML_API int mml_config_dim(const mml_config* cfg);
MML_API int mml_config_text(const mml_config* cfg, char** out);

/* Report functions write their text (or an error message) to *out. */
MML_API int mml_run_validate(const mml_config* cfg, const mml_policy* policy, char** out);
MML_API int mml_run_phi(const mml_config* cfg, char** out);
MML_API int mml_run_grad(const mml_config* cfg, const mml_policy* policy, const double* x, size_t n, char** out);
MML_API int mml_run_lie(const mml_config* cfg, const mml_policy* policy, const double* x, size_t n, char** out);
MML_API int mml_run_decrease(const mml_config* cfg, const mml_policy* policy, int samples, int clarke, double rate,
                             char** out);
/* csv receives the trajectory table, summary the event report; either may be NULL. */
MML_API int mml_run_simulate(const mml_config* cfg, const mml_policy* policy, const double* x0, size_t n,
                             double horizon, double max_step, char** csv, char** summary);
MML_API int mml_run_certify(const mml_config* cfg, const mml_policy* policy, int search, double budget_seconds,
                            char** out);
MML_API int mml_run_decompose(const mml_config* cfg, const mml_policy* policy, char** out);
MML_API int mml_run_reproduce(const char* name, const mml_policy* policy, char** out);
/* Phase portrait of trajectories from count initial points (row-major, count x 2). */
MML_API int mml_run_svg(const mml_config* cfg, const mml_policy* policy, const double* x0s, size_t count,
                        double horizon, const char* header, char** out);

#ifdef __cplusplus
}
#endif

#endif /* MMLYAP_H */
