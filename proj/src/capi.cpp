#include "conjlab/conjlab.h"

#include "catalog.hpp"
#include "conjugacy.hpp"
#include "dichotomy.hpp"
#include "errors.hpp"
#include "smoothness.hpp"

#include <algorithm>
#include <cstring>
#include <string>
#include <vector>

using namespace conjlab;

struct conjlab_model {
    Model model;
};

namespace {

thread_local std::string g_last_error;

int set_error(const std::string& msg, int code) {
    g_last_error = msg;
    return code;
}

int code_of(const Error& e) {
    switch (e.code()) {
        case ErrorCode::invalid_argument: return CONJLAB_INVALID_ARGUMENT;
        case ErrorCode::unknown_entry: return CONJLAB_UNKNOWN_ENTRY;
        case ErrorCode::param_constraint: return CONJLAB_PARAM_CONSTRAINT;
        case ErrorCode::integrator_failure: return CONJLAB_INTEGRATOR_FAILURE;
        case ErrorCode::truncation: return CONJLAB_TRUNCATION;
        case ErrorCode::non_contraction: return CONJLAB_NON_CONTRACTION;
        case ErrorCode::divergence: return CONJLAB_DIVERGENCE;
        case ErrorCode::missing_derivative: return CONJLAB_MISSING_DERIVATIVE;
        case ErrorCode::singular_matrix: return CONJLAB_SINGULAR_MATRIX;
        case ErrorCode::config: return CONJLAB_CONFIG;
        case ErrorCode::iteration_limit: return CONJLAB_ITERATION_LIMIT;
    }
    return CONJLAB_INTERNAL;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return CONJLAB_OK;
    } catch (const Error& e) {
        return set_error(e.what(), code_of(e));
    } catch (const std::exception& e) {
        return set_error(e.what(), CONJLAB_INTERNAL);
    }
}

Eigen::VectorXd to_vec(const double* p, int d) {
    return Eigen::Map<const Eigen::VectorXd>(p, d);
}

void write_mat(const Eigen::MatrixXd& m, double* out) {
    Eigen::Map<Eigen::MatrixXd>(out, m.rows(), m.cols()) = m;
}

int require_model(const conjlab_model* m) {
    if (!m) {
        set_error("null model handle", CONJLAB_INVALID_ARGUMENT);
        return 0;
    }
    return 1;
}

} // namespace

extern "C" {

const char* conjlab_version(void) { return "0.1.0"; }

const char* conjlab_last_error(void) { return g_last_error.c_str(); }

int conjlab_model_create(const char* catalog_id, const char* const* param_names,
                         const double* param_values, size_t n_params,
                         conjlab_model** out) {
    if (!catalog_id || !out)
        return set_error("null argument", CONJLAB_INVALID_ARGUMENT);
    if (n_params > 0 && (!param_names || !param_values))
        return set_error("parameter arrays are null", CONJLAB_INVALID_ARGUMENT);
    return guarded([&] {
        std::map<std::string, double> params;
        for (size_t i = 0; i < n_params; ++i)
            params[param_names[i]] = param_values[i];
        auto handle = new conjlab_model{get_entry(catalog_id, params).model};
        *out = handle;
    });
}

void conjlab_model_destroy(conjlab_model* m) { delete m; }

int conjlab_model_dim(const conjlab_model* m) {
    return m ? m->model.sys.dim : 0;
}

int conjlab_set_tolerance(conjlab_model* m, const char* name, double value) {
    if (!require_model(m)) return CONJLAB_INVALID_ARGUMENT;
    if (!name) return set_error("null tolerance name", CONJLAB_INVALID_ARGUMENT);
    return guarded([&] {
        if (value <= 0.0)
            fail(ErrorCode::invalid_argument, "tolerances must be positive");
        Tolerances& t = m->model.tol;
        std::string n = name;
        if (n == "quad") t.quad_tol = value;
        else if (n == "fp") t.fp_tol = value;
        else if (n == "ode_abs") t.ode.abs_tol = value;
        else if (n == "ode_rel") t.ode.rel_tol = value;
        else if (n == "grid_spacing") t.grid_spacing = value;
        else if (n == "horizon_cap") t.horizon_cap = value;
        else fail(ErrorCode::config, "unknown tolerance '" + n + "'");
        // numeric settings changed: cached flows and verdicts are stale
        m->model.fund.reset();
        m->model.verification.reset();
    });
}

int conjlab_transition_matrix(conjlab_model* m, double t, double s, double* out) {
    if (!require_model(m)) return CONJLAB_INVALID_ARGUMENT;
    return guarded([&] { write_mat(m->model.fundamentals().transition(t, s), out); });
}

int conjlab_solve(conjlab_model* m, double tau, const double* eta, double t,
                  double* out) {
    if (!require_model(m)) return CONJLAB_INVALID_ARGUMENT;
    return guarded([&] {
        const Model& mod = m->model;
        FlowBundle flow(mod.sys, mod.nl, tau, to_vec(eta, mod.sys.dim), 0,
                        mod.tol.ode, std::max({t, tau, 1.0}));
        Eigen::VectorXd y = flow.y(t);
        std::memcpy(out, y.data(), sizeof(double) * y.size());
    });
}

int conjlab_first_variation(conjlab_model* m, double tau, const double* eta,
                            double t, double* out) {
    if (!require_model(m)) return CONJLAB_INVALID_ARGUMENT;
    return guarded([&] {
        const Model& mod = m->model;
        FlowBundle flow(mod.sys, mod.nl, tau, to_vec(eta, mod.sys.dim), 1,
                        mod.tol.ode, std::max({t, tau, 1.0}));
        write_mat(flow.first_variation(t), out);
    });
}

int conjlab_second_variation(conjlab_model* m, double tau, const double* eta,
                             double t, double* out) {
    if (!require_model(m)) return CONJLAB_INVALID_ARGUMENT;
    return guarded([&] {
        const Model& mod = m->model;
        const int d = mod.sys.dim;
        FlowBundle flow(mod.sys, mod.nl, tau, to_vec(eta, d), 2, mod.tol.ode,
                        std::max({t, tau, 1.0}));
        auto W = flow.second_variation(t);
        for (int k = 0; k < d; ++k) write_mat(W[k], out + k * d * d);
    });
}

int conjlab_projector(conjlab_model* m, double t, double* out) {
    if (!require_model(m)) return CONJLAB_INVALID_ARGUMENT;
    return guarded([&] { write_mat(projector_at(m->model, t), out); });
}

int conjlab_greens(conjlab_model* m, double t, double s, double* out) {
    if (!require_model(m)) return CONJLAB_INVALID_ARGUMENT;
    return guarded([&] { write_mat(greens_operator(m->model, t, s), out); });
}

int conjlab_verify(conjlab_model* m, conjlab_verification* out) {
    if (!require_model(m)) return CONJLAB_INVALID_ARGUMENT;
    if (!out) return set_error("null output", CONJLAB_INVALID_ARGUMENT);
    return guarded([&] {
        const VerificationSummary& s = verify_all(m->model);
        out->p_hat = s.c23.p_hat;
        out->q_hat = s.c23.q_hat;
        out->c1_margin_p = s.c1.margin_p;
        out->c1_margin_q = s.c1.margin_q;
        out->c1_passed = s.c1.passed;
        out->c2_passed = s.c23.c2_passed;
        out->c3_passed = s.c23.c3_passed;
        out->c5_passed = s.c5.all_passed;
        out->fatal = s.fatal;
    });
}

int conjlab_verify_c5(conjlab_model* m, double tau, double* value, int* passed) {
    if (!require_model(m)) return CONJLAB_INVALID_ARGUMENT;
    return guarded([&] {
        C5Report rep = verify_c5(m->model, {tau});
        if (value) *value = rep.values[0];
        if (passed) *passed = rep.passed[0];
    });
}

int conjlab_corollary_conditions(conjlab_model* m, int level, int* passed) {
    if (!require_model(m)) return CONJLAB_INVALID_ARGUMENT;
    return guarded([&] {
        auto lvl = level == 0 ? CorollaryLevel::c1 : CorollaryLevel::c2_smooth;
        if (passed) *passed = corollary_conditions(m->model, lvl).all_passed;
    });
}

int conjlab_second_order_condition(conjlab_model* m, double tau, double* value,
                                   int* passed) {
    if (!require_model(m)) return CONJLAB_INVALID_ARGUMENT;
    return guarded([&] {
        auto cert = verify_second_order_condition(m->model, tau);
        if (value) *value = cert.value;
        if (passed) *passed = cert.passed;
    });
}

int conjlab_w_star(conjlab_model* m, double t, double tau, const double* eta,
                   double* out) {
    if (!require_model(m)) return CONJLAB_INVALID_ARGUMENT;
    return guarded([&] {
        Eigen::VectorXd w = w_star(m->model, t, tau, to_vec(eta, m->model.sys.dim));
        std::memcpy(out, w.data(), sizeof(double) * w.size());
    });
}

int conjlab_h_map(conjlab_model* m, double t, const double* xi, double* out,
                  double* residual, int* iterations) {
    if (!require_model(m)) return CONJLAB_INVALID_ARGUMENT;
    return guarded([&] {
        ConjugacyResult r = H_map(m->model, t, to_vec(xi, m->model.sys.dim));
        std::memcpy(out, r.value.data(), sizeof(double) * r.value.size());
        if (residual) *residual = r.residual;
        if (iterations) *iterations = r.iterations;
    });
}

int conjlab_g_map(conjlab_model* m, double t, const double* eta, double* out,
                  double* residual) {
    if (!require_model(m)) return CONJLAB_INVALID_ARGUMENT;
    return guarded([&] {
        ConjugacyResult r = G_map(m->model, t, to_vec(eta, m->model.sys.dim));
        std::memcpy(out, r.value.data(), sizeof(double) * r.value.size());
        if (residual) *residual = r.residual;
    });
}

int conjlab_g_map_anchored(conjlab_model* m, double tau, const double* eta,
                           double* out) {
    if (!require_model(m)) return CONJLAB_INVALID_ARGUMENT;
    return guarded([&] {
        Eigen::VectorXd g =
            G_map_anchored(m->model, tau, to_vec(eta, m->model.sys.dim));
        std::memcpy(out, g.data(), sizeof(double) * g.size());
    });
}

int conjlab_check_equivalence(conjlab_model* m, double tau, const double* xi,
                              const double* eta, const double* t_grid,
                              size_t n_t, conjlab_equivalence* out) {
    if (!require_model(m)) return CONJLAB_INVALID_ARGUMENT;
    if (!out || !t_grid || n_t == 0)
        return set_error("null/empty arguments", CONJLAB_INVALID_ARGUMENT);
    return guarded([&] {
        const int d = m->model.sys.dim;
        std::vector<double> grid(t_grid, t_grid + n_t);
        EquivalenceReport rep = check_equivalence(m->model, tau, to_vec(xi, d),
                                                  to_vec(eta, d), grid);
        out->h_identity = rep.h_identity;
        out->g_identity = rep.g_identity;
        out->h_roundtrip = rep.h_roundtrip;
        out->g_roundtrip = rep.g_roundtrip;
        out->h_bound = rep.h_bound;
        out->g_bound = rep.g_bound;
        out->p_hat = rep.p_hat;
        out->passed = rep.passed;
    });
}

int conjlab_dw(conjlab_model* m, double tau, const double* eta, double* out) {
    if (!require_model(m)) return CONJLAB_INVALID_ARGUMENT;
    return guarded([&] {
        write_mat(dw_star(m->model, tau, to_vec(eta, m->model.sys.dim)), out);
    });
}

int conjlab_dg(conjlab_model* m, double tau, const double* eta, double* out) {
    if (!require_model(m)) return CONJLAB_INVALID_ARGUMENT;
    return guarded([&] {
        write_mat(dG_map(m->model, tau, to_vec(eta, m->model.sys.dim)), out);
    });
}

int conjlab_dh(conjlab_model* m, double tau, const double* xi, double* out,
               double* condition_number) {
    if (!require_model(m)) return CONJLAB_INVALID_ARGUMENT;
    return guarded([&] {
        double cond = 0.0;
        Eigen::MatrixXd dh =
            dH_map(m->model, tau, to_vec(xi, m->model.sys.dim), &cond);
        write_mat(dh, out);
        if (condition_number) *condition_number = cond;
    });
}

int conjlab_d2w(conjlab_model* m, double tau, const double* eta, double* out) {
    if (!require_model(m)) return CONJLAB_INVALID_ARGUMENT;
    return guarded([&] {
        const int d = m->model.sys.dim;
        auto slices = d2w_star(m->model, tau, to_vec(eta, d));
        for (int k = 0; k < d; ++k) write_mat(slices[k], out + k * d * d);
    });
}

int conjlab_gronwall_bound(conjlab_model* m, double s, double tau, double* out) {
    if (!require_model(m)) return CONJLAB_INVALID_ARGUMENT;
    return guarded([&] { *out = gronwall_first(m->model, s, tau); });
}

int conjlab_second_derivative_bound(conjlab_model* m, double s, double tau,
                                    double* out) {
    if (!require_model(m)) return CONJLAB_INVALID_ARGUMENT;
    return guarded([&] { *out = second_derivative_bound(m->model, s, tau); });
}

} // extern "C"
