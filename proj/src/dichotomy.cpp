#include "dichotomy.hpp"

#include "errors.hpp"
#include "quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace conjlab {

double Model::param(const std::string& name) const {
    auto it = dich.params.find(name);
    if (it == dich.params.end())
        fail(ErrorCode::config, "missing dichotomy parameter '" + name + "'");
    return it->second;
}

bool Model::has_param(const std::string& name) const {
    return dich.params.count(name) > 0;
}

Eigen::MatrixXd projector_at(const Model& m, double t) {
    auto& fp = m.fundamentals();
    return fp.phi(t) * m.dich.P0 * fp.psi(t);
}

Eigen::MatrixXd greens_operator(const Model& m, double t, double s) {
    auto& fp = m.fundamentals();
    const int d = m.sys.dim;
    Eigen::MatrixXd Q0 = Eigen::MatrixXd::Identity(d, d) - m.dich.P0;
    if (t >= s) return fp.phi(t) * (m.dich.P0 * fp.psi(s));
    return -(fp.phi(t) * (Q0 * fp.psi(s)));
}

std::vector<std::pair<double, double>> default_c1_grid(double s_max,
                                                       int n_base,
                                                       int n_offsets) {
    std::vector<std::pair<double, double>> grid;
    for (int i = 0; i < n_base; ++i) {
        double s = s_max * i / (n_base - 1);
        grid.emplace_back(s, s);
        for (int j = 0; j < n_offsets; ++j) {
            // offsets 2^-4 .. 2^(n_offsets-5), clipped to [0, s_max]
            double off = std::ldexp(1.0, j - 4);
            if (s + off <= s_max) grid.emplace_back(s + off, s);
            if (s - off >= 0.0) grid.emplace_back(s - off, s);
        }
    }
    return grid;
}

C1Report verify_c1(const Model& m,
                   const std::vector<std::pair<double, double>>& grid) {
    if (grid.empty()) fail(ErrorCode::invalid_argument, "empty (t,s) grid");
    auto& fp = m.fundamentals();
    const int d = m.sys.dim;
    Eigen::MatrixXd Q0 = Eigen::MatrixXd::Identity(d, d) - m.dich.P0;

    C1Report rep;
    for (auto [t, s] : grid) {
        Eigen::MatrixXd Xts = fp.phi(t) * fp.psi(s);
        Eigen::MatrixXd Ps = projector_at(m, s);
        double K = m.dich.K(s);
        double hr = m.dich.h(t) / m.dich.h(s);
        if (t >= s) {
            double margin = opnorm(Xts * Ps) / (K * hr);
            rep.margin_p = std::max(rep.margin_p, margin);
        }
        if (t <= s) {
            Eigen::MatrixXd Qs = Eigen::MatrixXd::Identity(d, d) - Ps;
            double margin = opnorm(Xts * Qs) * hr / K;
            rep.margin_q = std::max(rep.margin_q, margin);
        }
        ++rep.pairs_checked;
    }
    rep.passed = rep.margin_p <= 1.0 + 1e-6 && rep.margin_q <= 1.0 + 1e-6;
    return rep;
}

std::vector<double> default_t_grid(double t_sup, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = t_sup * i / (n - 1);
    return g;
}

namespace {

// sup over t_grid of \int_0^inf ||G(t,s)|| env(s) ds
double greens_integral_sup(const Model& m, const std::vector<double>& t_grid,
                           const Envelope& env, double& tail_out) {
    auto& fp = m.fundamentals();
    const int d = m.sys.dim;
    Eigen::MatrixXd Q0 = Eigen::MatrixXd::Identity(d, d) - m.dich.P0;
    double sup = 0.0;
    tail_out = 0.0;
    for (double t : t_grid) {
        Eigen::MatrixXd phit = fp.phi(t);
        Integrand g = [&, t, phit](double s) {
            Eigen::MatrixXd G;
            if (t >= s) G = phit * (m.dich.P0 * fp.psi(s));
            else G = -(phit * (Q0 * fp.psi(s)));
            Eigen::VectorXd out(1);
            out(0) = opnorm(G) * env.value(s);
            return out;
        };
        // past the kink ||G(t,s)|| <= K(s)h(s)/h(t)
        double coef = m.dich.Kh.tail_coef * env.tail_coef / m.dich.h(t);
        double rate = m.dich.Kh.tail_rate + env.tail_rate;
        if (rate <= 0.0)
            fail(ErrorCode::truncation,
                 "Green's integrand tail rate is not positive");
        auto res = integrate_half_line(g, 1, t, exp_tail(coef, rate, t),
                                       m.tol.quad_tol, 0.0, m.tol.horizon_cap);
        sup = std::max(sup, res.value(0) + res.tail_bound);
        tail_out = std::max(tail_out, res.tail_bound);
    }
    return sup;
}

} // namespace

C2C3Report verify_c2_c3(const Model& m, const std::vector<double>& t_grid) {
    if (t_grid.empty()) fail(ErrorCode::invalid_argument, "empty t grid");
    C2C3Report rep;
    double tail_p = 0.0, tail_q = 0.0;
    rep.p_hat = greens_integral_sup(m, t_grid, m.nl.u_env, tail_p);
    rep.q_hat = greens_integral_sup(m, t_grid, m.nl.v_env, tail_q);
    rep.tail_bound = std::max(tail_p, tail_q);
    rep.c2_passed = std::isfinite(rep.p_hat);
    rep.c3_passed = std::isfinite(rep.q_hat) && rep.q_hat < 1.0;
    rep.t_sup = t_grid.back();
    rep.t_count = static_cast<int>(t_grid.size());
    return rep;
}

C5Report verify_c5(const Model& m, const std::vector<double>& taus) {
    C5Report rep;
    const auto& v = m.nl.v_env;
    for (double tau : taus) {
        rep.taus.push_back(tau);
        if (v.tail_coef == 0.0 && v.value(tau) == 0.0) {
            rep.values.push_back(0.0);
            rep.passed.push_back(true);
            rep.diagnostics.emplace_back("zero Lipschitz envelope");
            continue;
        }
        // exponent E(s) = int_tau^s ||A(r)|| + v(r) dr, extended on demand
        auto traj = std::make_shared<DenseTrajectory>();
        RhsFn exp_rhs = [&](double s, const Eigen::VectorXd&,
                            Eigen::VectorXd& out) {
            out(0) = opnorm(m.sys.coeff(s)) + v.value(s);
        };
        *traj = dense_solve(exp_rhs, tau, Eigen::VectorXd::Zero(1), tau,
                            tau + 1.0, m.tol.ode);
        auto E = [traj, exp_rhs, &m](double s) {
            if (s > traj->back_time()) extend_dense(*traj, exp_rhs, s, m.tol.ode);
            return traj->eval(s)(0);
        };
        Integrand integrand = [&](double s) {
            Eigen::VectorXd out(1);
            out(0) = m.dich.K(s) * m.dich.h(s) * v.value(s) * std::exp(E(s));
            return out;
        };

        double growth = m.sys.uniform_bound + v.value(tau);
        double kr = m.dich.Kh.tail_rate + v.tail_rate;
        double net_rate = kr - growth;
        if (net_rate <= 0.0) {
            double a = m.dich.K(tau) * m.dich.h(tau) * v.value(tau);
            double b = m.dich.K(tau + 10) * m.dich.h(tau + 10) *
                       v.value(tau + 10) * std::exp(E(tau + 10));
            std::ostringstream os;
            os << "integrand does not certifiably decay (envelope rate " << kr
               << " vs growth bound " << growth << "; value " << a << " at "
               << tau << ", " << b << " at " << tau + 10 << ")";
            rep.values.push_back(std::numeric_limits<double>::infinity());
            rep.passed.push_back(false);
            rep.diagnostics.push_back(os.str());
            continue;
        }
        double C0 = m.dich.Kh.tail_coef * v.tail_coef;
        TailEnvelope env;
        env.start = tau;
        env.tail = [=](double T) {
            return C0 * std::exp(E(T) - kr * T) / net_rate;
        };
        auto res = integrate_half_line(integrand, 1, tau, env, m.tol.quad_tol,
                                       tau, m.tol.horizon_cap);
        rep.values.push_back(res.value(0) + res.tail_bound);
        rep.passed.push_back(true);
        std::ostringstream os;
        os << "horizon " << res.horizon << ", tail " << res.tail_bound;
        rep.diagnostics.push_back(os.str());
    }
    rep.all_passed = std::all_of(rep.passed.begin(), rep.passed.end(),
                                 [](bool b) { return b; });
    return rep;
}

namespace {

void add_check(CorollaryReport& rep, const std::string& name, double lhs,
               double rhs) {
    rep.checks.push_back({name, lhs, rhs, lhs < rhs});
}

} // namespace

CorollaryReport corollary_conditions(const Model& m, CorollaryLevel level) {
    CorollaryReport rep;
    if (level == CorollaryLevel::c1) {
        if (m.has_param("eps1")) {
            // nonuniform exponential dichotomy form
            double lam = m.param("lambda");
            double M = m.param("M");
            double nu = m.param("nu");
            add_check(rep, "eps0 > eps1 - lambda", m.param("eps1") - lam,
                      m.param("eps0"));
            add_check(rep, "M < lambda", M, lam);
            add_check(rep, "nu < lambda - M", nu, lam - M);
        } else {
            double K = m.param("K");
            double v = m.param("nu");
            double lam = m.param("lambda");
            add_check(rep, "2*K*nu < lambda", 2.0 * K * v, lam);
            add_check(rep, "M + nu < lambda", m.param("M") + v, lam);
        }
    } else {
        double lam = m.param("lambda");
        double M = m.param("M");
        double e1 = m.param("eps1");
        double e2 = m.param("eps2");
        add_check(rep, "3*M < lambda + eps2", 3.0 * M, lam + e2);
        add_check(rep, "2*M < lambda + eps2 - eps1", 2.0 * M, lam + e2 - e1);
        add_check(rep, "M < lambda", M, lam);
        if (m.has_param("eps0") && m.param("eps0") == e1 && e1 == e2) {
            // equal-exponent reduction
            add_check(rep, "2*M < lambda", 2.0 * M, lam);
            add_check(rep, "3*M < lambda + eps", 3.0 * M, lam + e2);
        }
    }
    rep.all_passed = std::all_of(rep.checks.begin(), rep.checks.end(),
                                 [](const CorollaryCheck& c) { return c.passed; });
    return rep;
}

const VerificationSummary& verify_all(const Model& m) {
    if (!m.verification) {
        VerificationSummary s;
        s.c1 = verify_c1(m, default_c1_grid(5.0));
        s.c23 = verify_c2_c3(m, default_t_grid());
        s.c5 = verify_c5(m, {0.0, 1.0, 2.0});
        s.fatal = !(s.c23.q_hat < 1.0);
        m.verification = std::move(s);
    }
    return *m.verification;
}

} // namespace conjlab
