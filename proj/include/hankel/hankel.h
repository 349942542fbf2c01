#ifndef HANKEL_H
#define HANKEL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hk_status {
  HK_OK = 0,
  HK_ERR_DOMAIN = 1,
  HK_ERR_MODEL = 2,
  HK_ERR_LENGTH = 3,
  HK_ERR_CONVERGENCE = 4,
  HK_ERR_VALIDATION = 5,
  HK_ERR_RESOLUTION = 6,
  HK_ERR_IO = 7,
  HK_ERR_INTERNAL = 8,
  HK_ERR_NULL_ARGUMENT = 9
} hk_status;

typedef struct hk_section hk_section;
typedef struct hk_discretization hk_discretization;
typedef struct hk_series hk_series;

const char* hk_version(void);
const char* hk_status_name(hk_status status);
/* Message of the last failed call on the calling thread; "" if none. */
const char* hk_last_error(void);

/* Scalar evaluators. Complex values are returned as (re, im). */
hk_status hk_v_coefficient(double alpha, double* out);
hk_status hk_weyl_reference(int m, double t0, int64_t n, double* out);
hk_status hk_model_sequence(double alpha, int64_t j, double* out);
hk_status hk_sigma_eval(double alpha, double theta, double precision, double* re, double* im);
hk_status hk_tau_eval(int m, double t0, double x, double* re, double* im);

/* N x N Hankel section. gen holds interleaved (re, im) pairs h(0..len-1); len >= 2n-1. */
hk_status hk_section_create(const double* gen, size_t len, size_t n, hk_section** out);
/* Section of q(j) = j^-1 (log j)^-alpha. */
hk_status hk_section_create_model(double alpha, size_t n, hk_section** out);
size_t hk_section_dimension(const hk_section* section);
/* u and out hold n interleaved complex entries. */
hk_status hk_section_apply(const hk_section* section, const double* u, double* out);
hk_status hk_section_apply_adjoint(const hk_section* section, const double* u, double* out);
void hk_section_free(hk_section* section);

/* Nystrom discretization of the bump kernel (t0 - t)^m on (0, t0). */
hk_status hk_discretize_bump(int m, double t0, size_t panels, size_t nodes_per_panel, hk_discretization** out);
/* Continuous model given as JSON (the "model" object of an experiment config); mesh_json may be NULL. */
hk_status hk_discretize_model(const char* model_json, const char* mesh_json, hk_discretization** out);
size_t hk_discretization_dimension(const hk_discretization* d);
void hk_discretization_free(hk_discretization* d);

hk_status hk_series_dense_section(const hk_section* section, size_t dense_cap, hk_series** out);
hk_status hk_series_dense_discretization(const hk_discretization* d, size_t dense_cap, hk_series** out);
hk_status hk_series_lanczos_section(const hk_section* section, size_t k, double tol, uint64_t seed, hk_series** out);
size_t hk_series_size(const hk_series* series);
/* Copies min(size, capacity) values; returns the number copied through *copied if non-NULL. */
hk_status hk_series_values(const hk_series* series, double* out, size_t capacity, size_t* copied);
int hk_series_converged(const hk_series* series);
hk_status hk_series_count_above(const hk_series* series, double eps, size_t* out);
/* Least-squares power-law fit over the 1-based window [lo, hi]; a finite fixed_alpha selects fixed-alpha mode. */
hk_status hk_series_fit(const hk_series* series, int64_t lo, int64_t hi, double fixed_alpha, double* alpha_hat,
                        double* c_hat);
void hk_series_free(hk_series* series);

typedef struct hk_run_options {
  const char* out_dir; /* NULL: config output.dir, then $HANKEL_OUT_DIR, then ./hankel_out */
  unsigned threads;
  size_t dense_cap; /* 0: default */
  int has_seed;
  uint64_t seed;
  int recompute;
} hk_run_options;

void hk_run_options_init(hk_run_options* options);

/* Runs gen, spectrum, verify or localize. *exit_code receives 0 pass, 1 verdict fail,
   2 validation error, 3 runtime error; *summary_json (if non-NULL) receives a
   JSON summary to release with hk_string_free. Returns HK_OK whenever the
   command was dispatched, whatever its exit code. */
hk_status hk_run(const char* command, const char* config_json, const hk_run_options* options, int* exit_code,
                 char** summary_json);
void hk_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
