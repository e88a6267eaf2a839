#pragma once

#include "ode.hpp"

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <vector>

namespace conjlab {

/// Envelope c(s) with a dominating exponential tail coef·e^{-rate·s} used for
/// quadrature truncation certificates.
struct Envelope {
    std::function<double(double)> value;
    double tail_coef = 0.0;
    double tail_rate = 0.0;

    bool present() const { return static_cast<bool>(value); }
    double operator()(double s) const { return value(s); }
};

struct LinearSystemSpec {
    int dim = 0;
    std::function<Eigen::MatrixXd(double)> coeff; // t -> A(t)
    double uniform_bound = 0.0;                   // M: sup ||A||, ||A^-1||
};

struct NonlinearitySpec {
    std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> f;
    std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)> df;
    // d2f slice k holds (i,j) -> ∂²f_i/∂u_j∂u_k
    std::function<std::vector<Eigen::MatrixXd>(double, const Eigen::VectorXd&)> d2f;
    Envelope u_env; // |f(s,u)| <= u(s)
    Envelope v_env; // ||df(s,u)|| <= v(s)
    Envelope V_env; // ||d2f(s,u)|| <= V(s)
};

/// Operator 2-norm via singular values.
double opnorm(const Eigen::MatrixXd& m);

/// Transition matrix X(t, s) of x' = A(t)x by direct integration from s to t
/// (backward when t < s). X(t, t) = I.
Eigen::MatrixXd transition_matrix(const LinearSystemSpec& sys, double t, double s,
                                  const OdeOptions& opts = {});

/// Lazily extended fundamental pair Φ(t) = X(t,0), Ψ(t) = X(0,t) on [0, T];
/// X(t,s) = Φ(t)Ψ(s) for all t, s >= 0.
class FundamentalPair {
public:
    FundamentalPair(LinearSystemSpec sys, OdeOptions opts);

    Eigen::MatrixXd phi(double t) const;
    Eigen::MatrixXd psi(double t) const;
    Eigen::MatrixXd transition(double t, double s) const { return phi(t) * psi(s); }
    int dim() const { return sys_.dim; }

private:
    void ensure(double t) const;

    LinearSystemSpec sys_;
    OdeOptions opts_;
    mutable DenseTrajectory phi_traj_;
    mutable DenseTrajectory psi_traj_;
};

/// Dense solution of the nonlinear system y' = A(t)y + f(t,y) through (tau, eta),
/// optionally carrying the first and second variational states:
///   Z' = [A + df(t,y)] Z,                    Z(tau) = I
///   W'_k = [A + df(t,y)] W_k + Σ_mn d2f_(:,m,n) Z_mj Z_nk,  W(tau) = 0.
/// Defined on [0, hi]; extendable forward on demand.
class FlowBundle {
public:
    FlowBundle(const LinearSystemSpec& sys, const NonlinearitySpec& nl, double tau,
               Eigen::VectorXd eta, int order, OdeOptions opts, double initial_hi = -1.0);

    double tau() const { return tau_; }
    int order() const { return order_; }

    Eigen::VectorXd y(double s) const;
    Eigen::MatrixXd first_variation(double s) const;
    std::vector<Eigen::MatrixXd> second_variation(double s) const;

    void ensure(double s) const;

private:
    RhsFn make_rhs() const;

    LinearSystemSpec sys_;
    NonlinearitySpec nl_;
    double tau_;
    int order_;
    int dim_;
    OdeOptions opts_;
    mutable DenseTrajectory traj_;
};

/// Sampled envelope/bound validation (specs are user-supplied callables; the
/// checks are by sampling, n x n grid over [0, s_max] x box).
struct SpecCheckReport {
    bool coeff_bounded = true;     // ||A(t)||, ||A(t)^-1|| <= M
    bool coeff_invertible = true;
    bool u_ok = true;
    bool v_ok = true;
    bool V_ok = true;
    double worst_margin = 0.0;
};
SpecCheckReport check_specs(const LinearSystemSpec& sys, const NonlinearitySpec& nl,
                            double s_max, double box_radius, int n = 41);

} // namespace conjlab
