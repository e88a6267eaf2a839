#ifndef CONJLAB_H
#define CONJLAB_H

/* C interface to the conjugacy laboratory.
 *
 * All functions return a status code: 0 on success, nonzero on failure (see
 * the conjlab_status enum). On failure conjlab_last_error() returns a
 * human-readable message for the calling thread. Matrix outputs are written
 * in column-major order; third-order arrays as d consecutive d*d matrices
 * (slice k holds d2/du_j du_k).
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct conjlab_model conjlab_model;

enum conjlab_status {
    CONJLAB_OK = 0,
    CONJLAB_INVALID_ARGUMENT = 1,
    CONJLAB_UNKNOWN_ENTRY = 2,
    CONJLAB_PARAM_CONSTRAINT = 3,
    CONJLAB_INTEGRATOR_FAILURE = 4,
    CONJLAB_TRUNCATION = 5,
    CONJLAB_NON_CONTRACTION = 6,
    CONJLAB_DIVERGENCE = 7,
    CONJLAB_MISSING_DERIVATIVE = 8,
    CONJLAB_SINGULAR_MATRIX = 9,
    CONJLAB_CONFIG = 10,
    CONJLAB_ITERATION_LIMIT = 11,
    CONJLAB_INTERNAL = 100
};

const char* conjlab_version(void);

/* Last error message for the calling thread; empty string if none. */
const char* conjlab_last_error(void);

/* ---- model lifecycle ---- */

/* Create a model from a catalog entry. Parameters are given as parallel
 * name/value arrays (may be NULL when n_params is 0). */
int conjlab_model_create(const char* catalog_id, const char* const* param_names,
                         const double* param_values, size_t n_params,
                         conjlab_model** out);
void conjlab_model_destroy(conjlab_model* m);
int conjlab_model_dim(const conjlab_model* m);

/* Tolerance names: quad, fp, ode_abs, ode_rel, grid_spacing, horizon_cap. */
int conjlab_set_tolerance(conjlab_model* m, const char* name, double value);

/* ---- linear and nonlinear flows ---- */

int conjlab_transition_matrix(conjlab_model* m, double t, double s, double* out);
int conjlab_solve(conjlab_model* m, double tau, const double* eta, double t,
                  double* out);
int conjlab_first_variation(conjlab_model* m, double tau, const double* eta,
                            double t, double* out);
int conjlab_second_variation(conjlab_model* m, double tau, const double* eta,
                             double t, double* out);

/* ---- dichotomy ---- */

int conjlab_projector(conjlab_model* m, double t, double* out);
int conjlab_greens(conjlab_model* m, double t, double s, double* out);

typedef struct conjlab_verification {
    double p_hat;
    double q_hat;
    double c1_margin_p;
    double c1_margin_q;
    int c1_passed;
    int c2_passed;
    int c3_passed;
    int c5_passed;
    int fatal; /* q_hat >= 1 */
} conjlab_verification;

int conjlab_verify(conjlab_model* m, conjlab_verification* out);
int conjlab_verify_c5(conjlab_model* m, double tau, double* value, int* passed);

/* level: 0 first-order hypotheses, 1 second-order smoothness inequalities. */
int conjlab_corollary_conditions(conjlab_model* m, int level, int* passed);
int conjlab_second_order_condition(conjlab_model* m, double tau, double* value,
                                   int* passed);

/* ---- conjugacy maps ---- */

int conjlab_w_star(conjlab_model* m, double t, double tau, const double* eta,
                   double* out);
int conjlab_h_map(conjlab_model* m, double t, const double* xi, double* out,
                  double* residual, int* iterations);
int conjlab_g_map(conjlab_model* m, double t, const double* eta, double* out,
                  double* residual);
int conjlab_g_map_anchored(conjlab_model* m, double tau, const double* eta,
                           double* out);

typedef struct conjlab_equivalence {
    double h_identity;
    double g_identity;
    double h_roundtrip;
    double g_roundtrip;
    double h_bound;
    double g_bound;
    double p_hat;
    int passed;
} conjlab_equivalence;

int conjlab_check_equivalence(conjlab_model* m, double tau, const double* xi,
                              const double* eta, const double* t_grid,
                              size_t n_t, conjlab_equivalence* out);

/* ---- derivatives ---- */

int conjlab_dw(conjlab_model* m, double tau, const double* eta, double* out);
int conjlab_dg(conjlab_model* m, double tau, const double* eta, double* out);
int conjlab_dh(conjlab_model* m, double tau, const double* xi, double* out,
               double* condition_number);
int conjlab_d2w(conjlab_model* m, double tau, const double* eta, double* out);

int conjlab_gronwall_bound(conjlab_model* m, double s, double tau, double* out);
int conjlab_second_derivative_bound(conjlab_model* m, double s, double tau,
                                    double* out);

#ifdef __cplusplus
}
#endif

#endif /* CONJLAB_H */
