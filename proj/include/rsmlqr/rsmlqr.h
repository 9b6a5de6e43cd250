/* C interface to the rsmlqr library.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every call returns an rsmlqr_status; on failure rsmlqr_last_error()
 * returns a message for the calling thread. Text results (JSON, CSV) are
 * returned as rsmlqr_text handles owned by the caller. */
#ifndef RSMLQR_H
#define RSMLQR_H

#include <stddef.h>

#if defined(_WIN32)
#if defined(RSMLQR_BUILDING_LIBRARY)
#define RSMLQR_API __declspec(dllexport)
#else
#define RSMLQR_API __declspec(dllimport)
#endif
#else
#define RSMLQR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rsmlqr_status {
  RSMLQR_OK = 0,
  RSMLQR_ERR_INVALID_ARGUMENT = 1,
  RSMLQR_ERR_FILE_NOT_FOUND = 2,
  RSMLQR_ERR_PARSE = 3,
  RSMLQR_ERR_SCHEMA = 4,
  RSMLQR_ERR_DIMENSION = 5,
  RSMLQR_ERR_NOT_STABILIZABLE = 6,
  RSMLQR_ERR_WEIGHT = 7,
  RSMLQR_ERR_NUMERICAL = 8,
  RSMLQR_ERR_INTERNAL = 9
} rsmlqr_status;

/* Values double as the CLI exit codes of `check`. */
typedef enum rsmlqr_verdict {
  RSMLQR_COMPOSITIONAL = 0,
  RSMLQR_INCONCLUSIVE = 2,
  RSMLQR_NOT_COMPOSITIONAL = 3
} rsmlqr_verdict;

typedef enum rsmlqr_controller {
  RSMLQR_CONTROLLER_DIRECT = 0,
  RSMLQR_CONTROLLER_COMPOSED = 1
} rsmlqr_controller;

enum {
  RSMLQR_CHECK_THEOREM3 = 1,
  RSMLQR_CHECK_COROLLARY1 = 2,
  RSMLQR_CHECK_THEOREM5 = 4,
  RSMLQR_CHECK_ALL = 7
};

typedef struct rsmlqr_problem rsmlqr_problem;
typedef struct rsmlqr_text rsmlqr_text;

typedef struct rsmlqr_check_options {
  double tol;          /* <= 0 selects the library default (1e-8); must be finite */
  unsigned checks;     /* RSMLQR_CHECK_* bitmask; 0 means all */
  int compute_gap;     /* nonzero: add the optimality-gap section */
  const double* x0;    /* initial state for the gap; NULL means all ones */
  size_t x0_len;
  int record_timings;  /* nonzero: add meta.timings_ms (breaks byte-determinism) */
} rsmlqr_check_options;

typedef struct rsmlqr_check_summary {
  rsmlqr_verdict verdict;
  int has_deviation;
  double deviation; /* max |Pbar K - K Pcal| */
  int corollary1_ran;
  int corollary1_passes;
  int theorem5_ran;
  int theorem5_predicts;
  int has_gap;
  double gap;
  size_t inconsistencies;
} rsmlqr_check_summary;

typedef struct rsmlqr_search_options {
  size_t n_min, n_max;
  size_t m_min, m_max;
  size_t k_min, k_max;
  size_t trials;
  unsigned long long seed;
  double threshold;
  double tol;
  unsigned threads;
  const char* problem_dir; /* if set, each hit is written there as a problem file */
} rsmlqr_search_options;

RSMLQR_API const char* rsmlqr_version(void);
RSMLQR_API const char* rsmlqr_status_name(rsmlqr_status status);
RSMLQR_API const char* rsmlqr_last_error(void);

RSMLQR_API const char* rsmlqr_text_data(const rsmlqr_text* text);
RSMLQR_API size_t rsmlqr_text_size(const rsmlqr_text* text);
RSMLQR_API void rsmlqr_text_free(rsmlqr_text* text);

RSMLQR_API rsmlqr_status rsmlqr_problem_load(const char* path, rsmlqr_problem** out);
RSMLQR_API rsmlqr_status rsmlqr_problem_parse(const char* json, size_t len,
                                              rsmlqr_problem** out);
RSMLQR_API void rsmlqr_problem_free(rsmlqr_problem* problem);
RSMLQR_API size_t rsmlqr_problem_composite_dim(const rsmlqr_problem* problem);
RSMLQR_API rsmlqr_status rsmlqr_problem_to_json(const rsmlqr_problem* problem,
                                                rsmlqr_text** out);

/* K, Acal, Bcal, Qcal, Rbar as JSON. */
RSMLQR_API rsmlqr_status rsmlqr_compose(const rsmlqr_problem* problem, rsmlqr_text** out);
/* Subsystem, composed and direct LQR designs as JSON. */
RSMLQR_API rsmlqr_status rsmlqr_lqr(const rsmlqr_problem* problem, rsmlqr_text** out);

RSMLQR_API void rsmlqr_check_options_init(rsmlqr_check_options* options);
/* summary and report_out may each be NULL. */
RSMLQR_API rsmlqr_status rsmlqr_check(const rsmlqr_problem* problem,
                                      const rsmlqr_check_options* options,
                                      rsmlqr_check_summary* summary,
                                      rsmlqr_text** report_out);

/* Trajectory CSV of the composite closed loop. x0 NULL means all ones. */
RSMLQR_API rsmlqr_status rsmlqr_simulate(const rsmlqr_problem* problem,
                                         rsmlqr_controller controller, double horizon,
                                         double step, const double* x0, size_t x0_len,
                                         rsmlqr_text** csv_out, int* blew_up);

RSMLQR_API void rsmlqr_search_options_init(rsmlqr_search_options* options);
RSMLQR_API rsmlqr_status rsmlqr_search(const rsmlqr_search_options* options,
                                       rsmlqr_text** json_out, size_t* found);

#ifdef __cplusplus
}
#endif

#endif /* RSMLQR_H */
