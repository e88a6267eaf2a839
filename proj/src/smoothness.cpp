#include "smoothness.hpp"

#include "conjugacy.hpp"
#include "errors.hpp"
#include "quadrature.hpp"

#include <cmath>
#include <memory>
#include <sstream>

namespace conjlab {

namespace {

// E(s) = int_tau^s growth(r) dr as an on-demand dense trajectory
struct GrowthIntegral {
    std::shared_ptr<DenseTrajectory> traj;
    RhsFn rhs;
    double tau;
    OdeOptions opts;

    GrowthIntegral(std::function<double(double)> growth, double tau_,
                   const OdeOptions& o)
        : tau(tau_), opts(o) {
        rhs = [g = std::move(growth)](double s, const Eigen::VectorXd&,
                                      Eigen::VectorXd& dy) { dy(0) = g(s); };
        traj = std::make_shared<DenseTrajectory>(
            dense_solve(rhs, tau_, Eigen::VectorXd::Zero(1), tau_, tau_ + 1.0, o));
    }

    double operator()(double s) const {
        if (s > traj->back_time()) extend_dense(*traj, rhs, s, opts);
        if (s < traj->front_time()) return 0.0; // only queried for s >= tau
        return traj->eval(s)(0);
    }
};

// certified exponential tail for integrands dominated by
// K(s)h(s) v(s) exp(int_tau^s ||A||+v)
TailEnvelope first_order_tail(const Model& m, double tau,
                              const GrowthIntegral& E) {
    double kr = m.dich.Kh.tail_rate + m.nl.v_env.tail_rate;
    double growth = m.sys.uniform_bound + m.nl.v_env.value(tau);
    double net = kr - growth;
    if (net <= 0.0)
        fail(ErrorCode::truncation,
             "first-derivative tail does not certify: envelope rate " +
                 std::to_string(kr) + " vs growth bound " +
                 std::to_string(growth));
    double C0 = m.dich.Kh.tail_coef * m.nl.v_env.tail_coef;
    TailEnvelope env;
    env.start = tau;
    env.tail = [C0, kr, net, &E](double T) {
        return C0 * std::exp(E(T) - kr * T) / net;
    };
    return env;
}

} // namespace

double gronwall_first(const Model& m, double s, double tau) {
    double lo = std::min(s, tau), hi = std::max(s, tau);
    Integrand g = [&](double r) {
        Eigen::VectorXd v(1);
        v(0) = opnorm(m.sys.coeff(r)) + m.nl.v_env.value(r);
        return v;
    };
    return std::exp(integrate_adaptive(g, 1, lo, hi, m.tol.quad_tol)(0));
}

Eigen::MatrixXd dw_star(const Model& m, double tau, const Eigen::VectorXd& eta) {
    const int d = m.sys.dim;
    if (!m.nl.df) fail(ErrorCode::missing_derivative, "df not provided");
    if (!m.has_unstable_direction()) return Eigen::MatrixXd::Zero(d, d);

    auto& fp = m.fundamentals();
    Eigen::MatrixXd Q0 = Eigen::MatrixXd::Identity(d, d) - m.dich.P0;
    FlowBundle flow(m.sys, m.nl, tau, eta, 1, m.tol.ode, std::max(tau, 1.0));

    Integrand g = [&](double s) -> Eigen::VectorXd {
        flow.ensure(s);
        Eigen::MatrixXd integ =
            Q0 * (fp.psi(s) * (m.nl.df(s, flow.y(s)) * flow.first_variation(s)));
        return Eigen::Map<Eigen::VectorXd>(integ.data(), d * d);
    };
    GrowthIntegral E(
        [&](double r) {
            return opnorm(m.sys.coeff(r)) + m.nl.v_env.value(r);
        },
        tau, m.tol.ode);
    auto res = integrate_half_line(g, d * d, tau, first_order_tail(m, tau, E),
                                   m.tol.quad_tol, 0.0, m.tol.horizon_cap);
    return Eigen::Map<Eigen::MatrixXd>(res.value.data(), d, d);
}

Eigen::MatrixXd dG_map(const Model& m, double tau, const Eigen::VectorXd& eta) {
    FlowBundle flow(m.sys, m.nl, tau, eta, 1, m.tol.ode, std::max(tau, 1.0));
    Eigen::MatrixXd Z0 = flow.first_variation(0.0);
    return m.fundamentals().phi(tau) * (Z0 + dw_star(m, tau, eta));
}

Eigen::MatrixXd dH_map(const Model& m, double tau, const Eigen::VectorXd& xi,
                       double* condition_number) {
    Eigen::VectorXd h = H_map(m, tau, xi).value;
    Eigen::MatrixXd dg = dG_map(m, tau, h);
    Eigen::MatrixXd inv = dg.inverse();
    double cond = opnorm(dg) * opnorm(inv);
    if (condition_number) *condition_number = cond;
    if (!std::isfinite(cond) || cond > 1e12)
        fail(ErrorCode::singular_matrix,
             "dG is numerically singular (condition number above 1e12)");
    return inv;
}

std::vector<Eigen::MatrixXd> d2w_star(const Model& m, double tau,
                                      const Eigen::VectorXd& eta) {
    const int d = m.sys.dim;
    if (!m.nl.d2f) fail(ErrorCode::missing_derivative, "d2f not provided");
    if (!m.has_unstable_direction())
        return std::vector<Eigen::MatrixXd>(d, Eigen::MatrixXd::Zero(d, d));

    auto& fp = m.fundamentals();
    Eigen::MatrixXd Q0 = Eigen::MatrixXd::Identity(d, d) - m.dich.P0;
    FlowBundle flow(m.sys, m.nl, tau, eta, 2, m.tol.ode, std::max(tau, 1.0));

    Integrand g = [&](double s) -> Eigen::VectorXd {
        flow.ensure(s);
        Eigen::VectorXd y = flow.y(s);
        Eigen::MatrixXd Z = flow.first_variation(s);
        auto W = flow.second_variation(s);
        auto d2f = m.nl.d2f(s, y);
        Eigen::MatrixXd df = m.nl.df(s, y);
        Eigen::VectorXd out(d * d * d);
        for (int k = 0; k < d; ++k) {
            Eigen::MatrixXd slice = df * W[k];
            for (int n = 0; n < d; ++n) slice += (d2f[n] * Z) * Z(n, k);
            Eigen::MatrixXd piece = Q0 * (fp.psi(s) * slice);
            out.segment(k * d * d, d * d) =
                Eigen::Map<Eigen::VectorXd>(piece.data(), d * d);
        }
        return out;
    };
    auto res = integrate_half_line_empirical(g, d * d * d, tau, m.tol.quad_tol,
                                             0.0, m.tol.horizon_cap);
    std::vector<Eigen::MatrixXd> out(d);
    for (int k = 0; k < d; ++k) {
        Eigen::VectorXd seg = res.value.segment(k * d * d, d * d);
        out[k] = Eigen::Map<Eigen::MatrixXd>(seg.data(), d, d);
    }
    return out;
}

DerivativeBundle derivative_bundle(const Model& m, double tau,
                                   const Eigen::VectorXd& xi,
                                   bool second_order) {
    DerivativeBundle b;
    Eigen::VectorXd h = H_map(m, tau, xi).value;
    b.dw = dw_star(m, tau, h);
    b.dG = dG_map(m, tau, h);
    Eigen::MatrixXd inv = b.dG.inverse();
    b.condition_number = opnorm(b.dG) * opnorm(inv);
    if (!std::isfinite(b.condition_number) || b.condition_number > 1e12)
        fail(ErrorCode::singular_matrix,
             "dG is numerically singular (condition number above 1e12)");
    b.dH = inv;
    if (second_order) b.d2w = d2w_star(m, tau, h);
    return b;
}

double iterated_gronwall_bound(const std::function<double(double)>& growth,
                               const std::function<double(double)>& V,
                               double tau, double s, double tol) {
    if (s < tau) fail(ErrorCode::invalid_argument, "requires s >= tau");
    if (s == tau) return 0.0;
    GrowthIntegral E(growth, tau, OdeOptions{});
    Integrand inner = [&](double p) {
        Eigen::VectorXd v(1);
        v(0) = V(p) * std::exp(2.0 * E(p));
        return v;
    };
    double I = integrate_adaptive(inner, 1, tau, s, tol)(0);
    return std::exp(E(s)) * I;
}

double iterated_gronwall_closed_form(double M, double nu, double zeta,
                                     double eps2, double tau, double s) {
    double a = M + nu;
    if (std::abs(2.0 * a - eps2) < 1e-12)
        fail(ErrorCode::param_constraint,
             "closed form requires 2(M+nu) != eps2");
    return zeta * std::exp(-3.0 * tau * a) / (2.0 * a - eps2) *
           (std::exp((3.0 * a - eps2) * s) -
            std::exp((2.0 * a - eps2) * tau + a * s));
}

double second_derivative_bound(const Model& m, double s, double tau) {
    if (!m.nl.V_env.present()) return 0.0;
    return iterated_gronwall_bound(
        [&](double r) { return opnorm(m.sys.coeff(r)) + m.nl.v_env.value(r); },
        [&](double p) { return m.nl.V_env.value(p); }, tau, s, m.tol.quad_tol);
}

SecondOrderCertificate verify_second_order_condition(const Model& m, double tau) {
    SecondOrderCertificate cert;
    bool v_zero = m.nl.v_env.tail_coef == 0.0 && m.nl.v_env.value(tau) == 0.0;
    bool V_zero = !m.nl.V_env.present() ||
                  (m.nl.V_env.tail_coef == 0.0 && m.nl.V_env.value(tau) == 0.0);
    if (v_zero && V_zero) {
        cert.rate1_ok = cert.rate2_ok = cert.passed = true;
        cert.diagnostic = "zero envelopes";
        return cert;
    }

    double M = m.has_param("M") ? m.param("M") : m.sys.uniform_bound;
    double lam = m.param("lambda");
    double e1 = m.param("eps1");
    double e2 = m.param("eps2");
    cert.rate1_ok = 3.0 * M < lam + e2;
    cert.rate2_ok = 2.0 * M < lam + e2 - e1;
    if (!cert.rate1_ok || !cert.rate2_ok) {
        std::ostringstream os;
        os << "integrand growth: 3M=" << 3.0 * M << " vs lambda+eps2="
           << lam + e2 << "; 2M=" << 2.0 * M << " vs lambda+eps2-eps1="
           << lam + e2 - e1;
        cert.diagnostic = os.str();
        return cert;
    }

    auto growth = [&, M](double r) { return M + m.nl.v_env.value(r); };
    GrowthIntegral E(growth, tau, m.tol.ode);
    // pi(s) = Psi(s) * int_tau^s V e^{2E}; track the inner integral densely too
    auto inner_traj = std::make_shared<DenseTrajectory>();
    RhsFn inner_rhs = [&](double p, const Eigen::VectorXd&, Eigen::VectorXd& dy) {
        dy(0) = m.nl.V_env.value(p) * std::exp(2.0 * E(p));
    };
    *inner_traj = dense_solve(inner_rhs, tau, Eigen::VectorXd::Zero(1), tau,
                              tau + 1.0, m.tol.ode);
    auto inner_int = [&](double s) {
        if (s > inner_traj->back_time())
            extend_dense(*inner_traj, inner_rhs, s, m.tol.ode);
        return inner_traj->eval(s)(0);
    };

    Integrand outer = [&](double s) {
        double psi = std::exp(E(s));
        double pi = psi * inner_int(s);
        Eigen::VectorXd v(1);
        v(0) = m.dich.K(s) * m.dich.h(s) *
               (pi * m.nl.v_env.value(s) +
                m.nl.V_env.value(s) * psi * psi);
        return v;
    };
    auto res = integrate_half_line_empirical(outer, 1, tau, m.tol.quad_tol, tau,
                                             m.tol.horizon_cap);
    cert.value = res.value(0);
    cert.passed = std::isfinite(cert.value);
    std::ostringstream os;
    os << "horizon " << res.horizon << ", last-segment mass " << res.tail_bound;
    cert.diagnostic = os.str();
    return cert;
}

} // namespace conjlab
