#ifndef LLDYN_H
#define LLDYN_H

/* C interface to the low-density Lieb-Liniger correlator library.
 *
 * Every call returns an lldyn_status; on failure the message of the last
 * error on the calling thread is available from lldyn_last_error().
 * Objects are opaque and owned by the caller (free with the matching
 * *_free function). Bethe numbers are passed doubled (2 I_k). */

#include <stddef.h>

#if defined(LLDYN_BUILDING)
#define LLDYN_API __attribute__((visibility("default")))
#else
#define LLDYN_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lldyn_status {
  LLDYN_OK = 0,
  LLDYN_INVALID_ARGUMENT = 1,
  LLDYN_NOT_CONVERGED = 2,
  LLDYN_QUADRATURE = 3,
  LLDYN_DOMAIN = 4,
  LLDYN_IO = 5,
  LLDYN_WINDOW_TOO_SMALL = 6,
  LLDYN_BUFFER_TOO_SMALL = 7,
  LLDYN_INTERNAL = 99
} lldyn_status;

typedef enum lldyn_kind { LLDYN_FIELD = 0, LLDYN_DENSITY = 1 } lldyn_kind;

typedef struct lldyn_state lldyn_state;
typedef struct lldyn_density lldyn_density;

LLDYN_API const char* lldyn_version(void);
LLDYN_API const char* lldyn_last_error(void);
LLDYN_API const char* lldyn_status_name(lldyn_status s);

/* Bethe states */

LLDYN_API lldyn_status lldyn_bethe_solve(double L, double c, int N, const long* doubled_numbers, double tol,
                                         lldyn_state** out);
LLDYN_API lldyn_status lldyn_state_from_json(const char* text, lldyn_state** out);
LLDYN_API void lldyn_state_free(lldyn_state* s);

LLDYN_API int lldyn_state_n(const lldyn_state* s);
LLDYN_API double lldyn_state_length(const lldyn_state* s);
LLDYN_API double lldyn_state_coupling(const lldyn_state* s);
LLDYN_API double lldyn_state_residual(const lldyn_state* s);
/* copy N values into out (capacity cap) */
LLDYN_API lldyn_status lldyn_state_roots(const lldyn_state* s, double* out, size_t cap);
LLDYN_API lldyn_status lldyn_state_numbers(const lldyn_state* s, long* out, size_t cap);
LLDYN_API lldyn_status lldyn_state_energy_momentum(const lldyn_state* s, double* E, double* P);
/* det of the Gaudin matrix divided by L^N */
LLDYN_API lldyn_status lldyn_state_gaudin_det(const lldyn_state* s, double* out);
/* writes a NUL-terminated JSON record; *needed receives the size including the NUL */
LLDYN_API lldyn_status lldyn_state_to_json(const lldyn_state* s, char* buf, size_t cap, size_t* needed);

/* Normalised form factors <bra|op|ket> as log|FF| and arg FF.
 * p, s < 0 pick the internal indices automatically. */
LLDYN_API lldyn_status lldyn_field_ff(const lldyn_state* bra, const lldyn_state* ket, int p, int s,
                                      double* log_modulus, double* phase);
LLDYN_API lldyn_status lldyn_density_ff(const lldyn_state* bra, const lldyn_state* ket, int p,
                                        double* log_modulus, double* phase);

/* Partial-fraction checks */

typedef struct lldyn_pfd_check {
  char name[64];
  double value;
  double reference;
  double error;
  double threshold;
  int pass;
} lldyn_pfd_check;

/* runs the fixed verification table; *count receives its length */
LLDYN_API lldyn_status lldyn_pfd_verify(double c, int n_max, lldyn_pfd_check* out, size_t cap, size_t* count);
/* numerical residue of the reduced form factor at mu -> lam (mu_a used for the density only) */
LLDYN_API lldyn_status lldyn_pfd_residue(lldyn_kind kind, const double* lam, int N, double c, int a, double mu_a,
                                         double* value, double* error_estimate, double* closed_form);

/* Special functions */

LLDYN_API lldyn_status lldyn_chi(int sign, double x, double* re, double* im);
LLDYN_API lldyn_status lldyn_lattice_sum2(double alpha, double w, double tau, double L, long n_direct,
                                          double* closed_re, double* closed_im, double* direct_re,
                                          double* direct_im);
LLDYN_API lldyn_status lldyn_lattice_sum1(double alpha, double W, long n_direct, double* closed_re,
                                          double* closed_im, double* direct_re, double* direct_im);

/* Root densities: "family:gaussian,A=..,sigma=..", "family:box,h=..,a=..",
 * "family:gaussian_sum,...", "family:zero", "state:<json file>" or a CSV path. */

LLDYN_API lldyn_status lldyn_density_parse(const char* spec, lldyn_density** out);
LLDYN_API lldyn_status lldyn_density_from_state(const lldyn_state* s, lldyn_density** out);
LLDYN_API void lldyn_density_free(lldyn_density* d);
LLDYN_API lldyn_status lldyn_density_eval(const lldyn_density* d, double lambda, double* rho);
LLDYN_API lldyn_status lldyn_density_hole(const lldyn_density* d, double c, double lambda, double* rho_h);
LLDYN_API lldyn_status lldyn_density_total(const lldyn_density* d, double* D);
LLDYN_API lldyn_status lldyn_density_support(const lldyn_density* d, double* lo, double* hi);
LLDYN_API lldyn_status lldyn_density_describe(const lldyn_density* d, char* buf, size_t cap, size_t* needed);
/* Bethe numbers of the dilute state with N = round(D L); *N receives the count */
LLDYN_API lldyn_status lldyn_dilute_numbers(const lldyn_density* d, double L, double c, long* doubled, size_t cap,
                                            int* N);

/* Correlators */

typedef struct lldyn_sample {
  double x, t;
  double re, im;
  double error;
} lldyn_sample;

typedef struct lldyn_grid {
  double min, max;
  int n;
} lldyn_grid;

LLDYN_API lldyn_status lldyn_field_correlator(const lldyn_density* d, double c, double x, double t, double tol,
                                              lldyn_sample* out);
/* mu_cutoff <= 0: mu over the real line */
LLDYN_API lldyn_status lldyn_density_correlator(const lldyn_density* d, double c, double x, double t, double tol,
                                                double mu_cutoff, lldyn_sample* out);
LLDYN_API lldyn_status lldyn_phi(const lldyn_density* d, double c, double lambda, double mu, double* out);
/* out has x.n * t.n entries, x fastest */
LLDYN_API lldyn_status lldyn_correlator_grid(const lldyn_density* d, double c, lldyn_grid x, lldyn_grid t,
                                             lldyn_kind kind, double tol, int threads, double mu_cutoff,
                                             lldyn_sample* out);
/* k: x.n, omega: t.n, re/im: x.n * t.n with k fastest */
LLDYN_API lldyn_status lldyn_spectral_grid(const lldyn_density* d, double c, lldyn_grid x, lldyn_grid t,
                                           lldyn_kind kind, double tol, int threads, double mu_cutoff, double* k,
                                           double* omega, double* re, double* im);

/* Finite-size Lehmann sums */

typedef struct lldyn_lehmann_config {
  long number_window; /* 0: automatic */
  long cross_limit;   /* 0: automatic */
  long max_states;
  double tol;
  int threads;
} lldyn_lehmann_config;

typedef struct lldyn_lehmann_info {
  double saturation;
  double stability;
  long states;
  long window;
} lldyn_lehmann_info;

LLDYN_API void lldyn_lehmann_config_default(lldyn_lehmann_config* cfg);
/* values at npoints (x[i], t[i]); info may be NULL */
LLDYN_API lldyn_status lldyn_lehmann(const lldyn_state* s, lldyn_kind kind, const double* x, const double* t,
                                     size_t npoints, const lldyn_lehmann_config* cfg, double* re, double* im,
                                     lldyn_lehmann_info* info);

typedef struct lldyn_study_row {
  double D;
  int N;
  double L, x, t;
  double formula_re, formula_im;
  double oracle_re, oracle_im;
  double rel_err, rel_err_with_d2;
  double saturation, stability;
} lldyn_study_row;

typedef struct lldyn_study_summary {
  double exponent, exponent_with_d2;
  int monotone, monotone_with_d2;
} lldyn_study_summary;

/* rows has nD entries */
LLDYN_API lldyn_status lldyn_convergence_study(const lldyn_density* shape, int N, const double* D, size_t nD, double c,
                                               double x, double t, lldyn_kind kind, const lldyn_lehmann_config* cfg,
                                               lldyn_study_row* rows, lldyn_study_summary* summary);

#ifdef __cplusplus
}
#endif

#endif
