#include "conjugacy.hpp"

#include "dichotomy.hpp"
#include "errors.hpp"
#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace conjlab {

Eigen::VectorXd GridFunction::eval(double t) const {
    if (nodes.empty()) fail(ErrorCode::invalid_argument, "empty grid function");
    if (t >= nodes.back())
        return values.back() * std::exp(-decay_rate * (t - nodes.back()));
    if (t <= nodes.front()) return values.front();

    auto it = std::upper_bound(nodes.begin(), nodes.end(), t);
    std::size_t j = static_cast<std::size_t>(it - nodes.begin()); // nodes[j-1] <= t < nodes[j]
    if (std::abs(nodes[j - 1] - t) < 1e-13) return values[j - 1];
    if (nodes.size() < 4) {
        double w = (t - nodes[j - 1]) / (nodes[j] - nodes[j - 1]);
        return (1.0 - w) * values[j - 1] + w * values[j];
    }

    // cubic Lagrange through the four nodes around the interval
    std::size_t lo = (j >= 2) ? j - 2 : 0;
    if (lo + 3 >= nodes.size()) lo = nodes.size() - 4;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(values[0].size());
    for (std::size_t a = lo; a < lo + 4; ++a) {
        double w = 1.0;
        for (std::size_t b = lo; b < lo + 4; ++b)
            if (b != a) w *= (t - nodes[b]) / (nodes[a] - nodes[b]);
        out += w * values[a];
    }
    return out;
}

double GridFunction::sup_norm() const {
    double s = 0.0;
    for (const auto& v : values) s = std::max(s, v.norm());
    return s;
}

GridFunction zero_grid_function(const std::vector<double>& nodes, int dim,
                                double decay_rate) {
    GridFunction g;
    g.nodes = nodes;
    g.values.assign(nodes.size(), Eigen::VectorXd::Zero(dim));
    g.decay_rate = decay_rate;
    return g;
}

std::vector<double> working_grid(const Model& m, double tau,
                                 const std::vector<double>& extra) {
    double span = std::max(2.0 * tau, m.tol.grid_min_span);
    for (double e : extra) span = std::max(span, e);
    double dt = m.tol.grid_spacing;
    std::vector<double> nodes;
    int n = static_cast<int>(std::ceil(span / dt - 1e-12));
    for (int i = 0; i <= n; ++i) nodes.push_back(std::min(i * dt, span));
    nodes.push_back(tau);
    nodes.insert(nodes.end(), extra.begin(), extra.end());
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                nodes.end());
    return nodes;
}

namespace {

double phi_decay_rate(const Model& m) {
    return m.dich.Kh.tail_rate + m.nl.u_env.tail_rate;
}

} // namespace

Eigen::VectorXd w_star(const Model& m, double t, double tau,
                       const Eigen::VectorXd& eta, double* tail_bound) {
    const int d = m.sys.dim;
    auto& fp = m.fundamentals();
    Eigen::MatrixXd Q0 = Eigen::MatrixXd::Identity(d, d) - m.dich.P0;
    FlowBundle flow(m.sys, m.nl, tau, eta, 0, m.tol.ode,
                    std::max({t, tau, 1.0}) + 1.0);
    Eigen::MatrixXd phit = fp.phi(t);

    if (!m.has_unstable_direction()) {
        // G(t,s) vanishes for s > t: the integral truncates exactly at t
        if (tail_bound) *tail_bound = 0.0;
        if (t <= 0.0) return Eigen::VectorXd::Zero(d);
        Integrand g = [&](double s) -> Eigen::VectorXd {
            flow.ensure(s);
            return m.dich.P0 * (fp.psi(s) * m.nl.f(s, flow.y(s)));
        };
        Eigen::VectorXd inner =
            integrate_adaptive(g, d, 0.0, t, m.tol.quad_tol);
        return -(phit * inner);
    }

    Integrand g = [&](double s) -> Eigen::VectorXd {
        flow.ensure(s);
        Eigen::VectorXd fv = m.nl.f(s, flow.y(s));
        if (t >= s) return phit * (m.dich.P0 * (fp.psi(s) * fv));
        return -(phit * (Q0 * (fp.psi(s) * fv)));
    };
    double coef = m.dich.Kh.tail_coef * m.nl.u_env.tail_coef / m.dich.h(t);
    auto res = integrate_half_line(g, d, t, exp_tail(coef, phi_decay_rate(m), t),
                                   m.tol.quad_tol, 0.0, m.tol.horizon_cap);
    if (tail_bound) *tail_bound = res.tail_bound;
    return -res.value;
}

GridFunction apply_T(const Model& m, const GridFunction& phi, double tau,
                     const Eigen::VectorXd& xi) {
    const int d = m.sys.dim;
    auto& fp = m.fundamentals();
    Eigen::VectorXd anchor = fp.psi(tau) * xi; // x(s,tau,xi) = Phi(s) * anchor

    auto f_along = [&](double s) -> Eigen::VectorXd {
        return m.nl.f(s, fp.phi(s) * anchor + phi.eval(s));
    };

    Integrand gP = [&](double s) -> Eigen::VectorXd {
        return m.dich.P0 * (fp.psi(s) * f_along(s));
    };
    auto MP = integrate_cumulative(gP, d, phi.nodes, m.tol.quad_tol);

    GridFunction out;
    out.nodes = phi.nodes;
    out.decay_rate = phi_decay_rate(m);
    out.values.resize(phi.nodes.size());

    if (!m.has_unstable_direction()) {
        for (std::size_t i = 0; i < phi.nodes.size(); ++i)
            out.values[i] = fp.phi(phi.nodes[i]) * MP[i];
        return out;
    }

    Eigen::MatrixXd Q0 = Eigen::MatrixXd::Identity(d, d) - m.dich.P0;
    Integrand gQ = [&](double s) -> Eigen::VectorXd {
        return Q0 * (fp.psi(s) * f_along(s));
    };
    auto MQ = integrate_cumulative(gQ, d, phi.nodes, m.tol.quad_tol);
    // remaining mass past the grid; ||Q0 Psi(s)|| = ||X(0,s)Q(s)|| <= K(s)h(s)
    double T = phi.nodes.back();
    double coef = m.dich.Kh.tail_coef * m.nl.u_env.tail_coef;
    auto qtail = integrate_half_line(gQ, d, T, exp_tail(coef, phi_decay_rate(m), T),
                                     m.tol.quad_tol, T, m.tol.horizon_cap);
    Eigen::VectorXd MQ_total = MQ.back() + qtail.value;

    for (std::size_t i = 0; i < phi.nodes.size(); ++i)
        out.values[i] = fp.phi(phi.nodes[i]) * (MP[i] - (MQ_total - MQ[i]));
    return out;
}

GridFunction z_star(const Model& m, double tau, const Eigen::VectorXd& xi,
                    PicardStats* stats, const std::vector<double>& extra_nodes) {
    const auto& ver = verify_all(m);
    if (ver.fatal)
        fail(ErrorCode::non_contraction,
             "q_hat >= 1: the fixed-point operator is not certified contractive");
    double q = ver.c23.q_hat;
    double threshold =
        (q > 0.0) ? m.tol.fp_tol * (1.0 - q) / q
                  : std::numeric_limits<double>::infinity();

    auto nodes = working_grid(m, tau, extra_nodes);
    GridFunction phi = zero_grid_function(nodes, m.sys.dim, phi_decay_rate(m));

    PicardStats st;
    double prev_diff = -1.0;
    int bad_streak = 0;
    for (int k = 1; k <= m.tol.fp_max_iter; ++k) {
        GridFunction next = apply_T(m, phi, tau, xi);
        double diff = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            diff = std::max(diff, (next.values[i] - phi.values[i]).norm());
        phi = std::move(next);
        st.iterations = k;
        st.last_diff = diff;
        if (prev_diff > 100.0 * m.tol.quad_tol) {
            double ratio = diff / prev_diff;
            st.max_ratio = std::max(st.max_ratio, ratio);
            bad_streak = (ratio >= 1.0) ? bad_streak + 1 : 0;
            if (bad_streak >= 3)
                fail(ErrorCode::divergence,
                     "Picard iteration is not contracting (ratio >= 1 three times)");
        }
        prev_diff = diff;
        if (diff <= threshold) {
            st.residual = (q > 0.0 ? q / (1.0 - q) * diff : 0.0) + m.tol.quad_tol;
            if (stats) *stats = st;
            return phi;
        }
    }
    fail(ErrorCode::iteration_limit, "Picard iteration cap exceeded");
}

ConjugacyResult H_map(const Model& m, double t, const Eigen::VectorXd& xi) {
    PicardStats st;
    GridFunction z = z_star(m, t, xi, &st, {t});
    ConjugacyResult r;
    r.correction = z.eval(t);
    r.value = xi + r.correction;
    r.iterations = st.iterations;
    r.residual = st.residual;
    return r;
}

ConjugacyResult G_map(const Model& m, double t, const Eigen::VectorXd& eta) {
    ConjugacyResult r;
    r.correction = w_star(m, t, t, eta, &r.tail_bound);
    r.value = eta + r.correction;
    r.iterations = 1;
    r.residual = r.tail_bound + m.tol.quad_tol;
    return r;
}

Eigen::VectorXd G_map_anchored(const Model& m, double tau,
                               const Eigen::VectorXd& eta) {
    FlowBundle flow(m.sys, m.nl, tau, eta, 0, m.tol.ode, std::max(tau, 1.0));
    Eigen::VectorXd y0 = flow.y(0.0);
    Eigen::VectorXd w0 = w_star(m, 0.0, tau, eta);
    return m.fundamentals().phi(tau) * (y0 + w0);
}

EquivalenceReport check_equivalence(const Model& m, double tau,
                                    const Eigen::VectorXd& xi,
                                    const Eigen::VectorXd& eta,
                                    const std::vector<double>& t_grid) {
    EquivalenceReport rep;
    rep.p_hat = verify_all(m).c23.p_hat;
    auto& fp = m.fundamentals();

    Eigen::VectorXd H_tau = H_map(m, tau, xi).value;
    Eigen::VectorXd G_tau = G_map(m, tau, eta).value;
    rep.h_roundtrip = (H_map(m, tau, G_tau).value - eta).norm();
    rep.g_roundtrip = (G_map(m, tau, H_tau).value - xi).norm();

    FlowBundle y_from_H(m.sys, m.nl, tau, H_tau, 0, m.tol.ode, std::max(tau, 1.0));
    FlowBundle y_from_eta(m.sys, m.nl, tau, eta, 0, m.tol.ode, std::max(tau, 1.0));

    for (double t : t_grid) {
        Eigen::VectorXd x_t = fp.phi(t) * (fp.psi(tau) * xi);
        Eigen::VectorXd Hx = H_map(m, t, x_t).value;
        y_from_H.ensure(t);
        rep.h_identity = std::max(rep.h_identity, (Hx - y_from_H.y(t)).norm());
        rep.h_bound = std::max(rep.h_bound, (Hx - x_t).norm());

        y_from_eta.ensure(t);
        Eigen::VectorXd y_t = y_from_eta.y(t);
        Eigen::VectorXd Gy = G_map(m, t, y_t).value;
        Eigen::VectorXd xg = fp.phi(t) * (fp.psi(tau) * G_tau);
        rep.g_identity = std::max(rep.g_identity, (Gy - xg).norm());
        rep.g_bound = std::max(rep.g_bound, (Gy - y_t).norm());
    }

    rep.passed = rep.h_identity <= 1e-5 && rep.g_identity <= 1e-5 &&
                 rep.h_roundtrip <= 1e-5 && rep.g_roundtrip <= 1e-5 &&
                 rep.h_bound <= rep.p_hat + 1e-6 && rep.g_bound <= rep.p_hat + 1e-6;
    return rep;
}

} // namespace conjlab
