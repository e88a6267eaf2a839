#include "flows.hpp"

#include "errors.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <random>

namespace conjlab {

double opnorm(const Eigen::MatrixXd& m) {
    if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
    return m.jacobiSvd().singularValues()(0);
}

Eigen::MatrixXd transition_matrix(const LinearSystemSpec& sys, double t, double s,
                                  const OdeOptions& opts) {
    if (t < 0.0 || s < 0.0)
        fail(ErrorCode::invalid_argument, "transition_matrix: negative time");
    const int d = sys.dim;
    if (t == s) return Eigen::MatrixXd::Identity(d, d);
    RhsFn rhs = [&sys, d](double tt, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
        Eigen::Map<const Eigen::MatrixXd> X(x.data(), d, d);
        Eigen::Map<Eigen::MatrixXd> dX(dx.data(), d, d);
        dX = sys.coeff(tt) * X;
    };
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(d * d);
    Eigen::Map<Eigen::MatrixXd>(x0.data(), d, d).setIdentity();
    AdaptiveRk45 solver(rhs, opts);
    Eigen::VectorXd xt = solver.integrate(s, x0, t);
    return Eigen::Map<const Eigen::MatrixXd>(xt.data(), d, d);
}

FundamentalPair::FundamentalPair(LinearSystemSpec sys, OdeOptions opts)
    : sys_(std::move(sys)), opts_(opts) {
    const int d = sys_.dim;
    Eigen::VectorXd id = Eigen::VectorXd::Zero(d * d);
    Eigen::Map<Eigen::MatrixXd>(id.data(), d, d).setIdentity();
    RhsFn phi_rhs = [this, d](double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
        Eigen::Map<const Eigen::MatrixXd> X(x.data(), d, d);
        Eigen::Map<Eigen::MatrixXd> dX(dx.data(), d, d);
        dX = sys_.coeff(t) * X;
    };
    RhsFn psi_rhs = [this, d](double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
        Eigen::Map<const Eigen::MatrixXd> X(x.data(), d, d);
        Eigen::Map<Eigen::MatrixXd> dX(dx.data(), d, d);
        dX = -X * sys_.coeff(t);
    };
    phi_traj_ = dense_solve(phi_rhs, 0.0, id, 0.0, 1.0, opts_);
    psi_traj_ = dense_solve(psi_rhs, 0.0, id, 0.0, 1.0, opts_);
}

void FundamentalPair::ensure(double t) const {
    if (t <= phi_traj_.back_time()) return;
    const int d = sys_.dim;
    double hi = std::max(t, phi_traj_.back_time() + 1.0);
    RhsFn phi_rhs = [this, d](double tt, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
        Eigen::Map<const Eigen::MatrixXd> X(x.data(), d, d);
        Eigen::Map<Eigen::MatrixXd> dX(dx.data(), d, d);
        dX = sys_.coeff(tt) * X;
    };
    RhsFn psi_rhs = [this, d](double tt, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
        Eigen::Map<const Eigen::MatrixXd> X(x.data(), d, d);
        Eigen::Map<Eigen::MatrixXd> dX(dx.data(), d, d);
        dX = -X * sys_.coeff(tt);
    };
    extend_dense(phi_traj_, phi_rhs, hi, opts_);
    extend_dense(psi_traj_, psi_rhs, hi, opts_);
}

Eigen::MatrixXd FundamentalPair::phi(double t) const {
    if (t < 0.0) fail(ErrorCode::invalid_argument, "FundamentalPair: negative time");
    ensure(t);
    const int d = sys_.dim;
    Eigen::VectorXd v = phi_traj_.eval(t);
    return Eigen::Map<const Eigen::MatrixXd>(v.data(), d, d);
}

Eigen::MatrixXd FundamentalPair::psi(double t) const {
    if (t < 0.0) fail(ErrorCode::invalid_argument, "FundamentalPair: negative time");
    ensure(t);
    const int d = sys_.dim;
    Eigen::VectorXd v = psi_traj_.eval(t);
    return Eigen::Map<const Eigen::MatrixXd>(v.data(), d, d);
}

RhsFn FlowBundle::make_rhs() const {
    const int d = dim_;
    const int order = order_;
    return [this, d, order](double t, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
        Eigen::VectorXd y = x.head(d);
        Eigen::MatrixXd A = sys_.coeff(t);
        dx.head(d) = A * y + nl_.f(t, y);
        if (order >= 1) {
            Eigen::MatrixXd J = A + nl_.df(t, y);
            Eigen::Map<const Eigen::MatrixXd> Z(x.data() + d, d, d);
            Eigen::Map<Eigen::MatrixXd> dZ(dx.data() + d, d, d);
            dZ = J * Z;
            if (order >= 2) {
                std::vector<Eigen::MatrixXd> d2f = nl_.d2f(t, y);
                for (int k = 0; k < d; ++k) {
                    Eigen::Map<const Eigen::MatrixXd> Wk(x.data() + d + d * d + k * d * d,
                                                         d, d);
                    Eigen::Map<Eigen::MatrixXd> dWk(dx.data() + d + d * d + k * d * d, d,
                                                    d);
                    dWk = J * Wk;
                    // source: dWk(i,j) += Σ_mn d2f[n](i,m) Z(m,j) Z(n,k)
                    for (int n = 0; n < d; ++n)
                        dWk += (d2f[n] * Z) * Z(n, k);
                }
            }
        }
    };
}

FlowBundle::FlowBundle(const LinearSystemSpec& sys, const NonlinearitySpec& nl,
                       double tau, Eigen::VectorXd eta, int order, OdeOptions opts,
                       double initial_hi)
    : sys_(sys), nl_(nl), tau_(tau), order_(order), dim_(sys.dim), opts_(opts) {
    if (tau < 0.0) fail(ErrorCode::invalid_argument, "FlowBundle: tau < 0");
    if (order_ >= 1 && !nl_.df)
        fail(ErrorCode::missing_derivative, "first variation requires df");
    if (order_ >= 2 && !nl_.d2f)
        fail(ErrorCode::missing_derivative, "second variation requires d2f");
    const int d = dim_;
    int n = d;
    if (order_ >= 1) n += d * d;
    if (order_ >= 2) n += d * d * d;
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
    x0.head(d) = eta;
    if (order_ >= 1)
        Eigen::Map<Eigen::MatrixXd>(x0.data() + d, d, d).setIdentity();
    double hi = std::max({initial_hi, tau_, 1.0});
    traj_ = dense_solve(make_rhs(), tau_, x0, 0.0, hi, opts_);
}

void FlowBundle::ensure(double s) const {
    if (s <= traj_.back_time()) return;
    extend_dense(traj_, make_rhs(), std::max(s, traj_.back_time() + 1.0), opts_);
}

Eigen::VectorXd FlowBundle::y(double s) const {
    if (s < 0.0) fail(ErrorCode::invalid_argument, "FlowBundle: negative time");
    ensure(s);
    return traj_.eval(s).head(dim_);
}

Eigen::MatrixXd FlowBundle::first_variation(double s) const {
    if (order_ < 1) fail(ErrorCode::missing_derivative, "bundle built without df");
    ensure(s);
    Eigen::VectorXd x = traj_.eval(s);
    return Eigen::Map<const Eigen::MatrixXd>(x.data() + dim_, dim_, dim_);
}

std::vector<Eigen::MatrixXd> FlowBundle::second_variation(double s) const {
    if (order_ < 2) fail(ErrorCode::missing_derivative, "bundle built without d2f");
    ensure(s);
    Eigen::VectorXd x = traj_.eval(s);
    const int d = dim_;
    std::vector<Eigen::MatrixXd> W(d);
    for (int k = 0; k < d; ++k)
        W[k] = Eigen::Map<const Eigen::MatrixXd>(x.data() + d + d * d + k * d * d, d, d);
    return W;
}

SpecCheckReport check_specs(const LinearSystemSpec& sys, const NonlinearitySpec& nl,
                            double s_max, double box_radius, int n) {
    SpecCheckReport rep;
    const int d = sys.dim;
    const double slack = 1e-9;
    std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> unif(-box_radius, box_radius);
    for (int i = 0; i < n; ++i) {
        double s = s_max * static_cast<double>(i) / (n - 1);
        Eigen::MatrixXd A = sys.coeff(s);
        double na = opnorm(A);
        double det = A.determinant();
        if (std::abs(det) < 1e-12) rep.coeff_invertible = false;
        double nia = rep.coeff_invertible ? opnorm(A.inverse()) : 0.0;
        if (na > sys.uniform_bound + slack || nia > sys.uniform_bound + slack)
            rep.coeff_bounded = false;
        for (int j = 0; j < n; ++j) {
            Eigen::VectorXd u(d);
            if (d == 1) {
                u(0) = -box_radius + 2.0 * box_radius * static_cast<double>(j) / (n - 1);
            } else {
                for (int k = 0; k < d; ++k) u(k) = unif(rng);
            }
            if (nl.f && nl.u_env.present()) {
                double margin = nl.f(s, u).norm() - nl.u_env(s);
                rep.worst_margin = std::max(rep.worst_margin, margin);
                if (margin > slack) rep.u_ok = false;
            }
            if (nl.df && nl.v_env.present()) {
                if (opnorm(nl.df(s, u)) > nl.v_env(s) + slack) rep.v_ok = false;
            }
            if (nl.d2f && nl.V_env.present()) {
                std::vector<Eigen::MatrixXd> T = nl.d2f(s, u);
                double nrm = 0.0;
                for (const auto& Tk : T) nrm = std::max(nrm, opnorm(Tk));
                if (nrm > nl.V_env(s) + slack) rep.V_ok = false;
            }
        }
    }
    return rep;
}

} // namespace conjlab
