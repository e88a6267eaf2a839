#pragma once

#include "model.hpp"

namespace conjlab {

struct DerivativeBundle {
    Eigen::MatrixXd dG;
    Eigen::MatrixXd dH;
    Eigen::MatrixXd dw;
    std::vector<Eigen::MatrixXd> d2w; // slice k: (i,j) -> d2w_i / d_eta_j d_eta_k
    double condition_number = 0.0;    // of dG
};

/// exp(int_tau^s ||A(r)|| + v(r) dr); dominates ||dy/deta(s,tau,eta)||.
double gronwall_first(const Model& m, double s, double tau);

/// dw*/deta(0;(tau,eta)) = -int_0^inf G(0,s) df(s,y) dy/deta ds.
/// Vanishes identically when Q = 0 (the kernel at time 0 has no stable branch
/// mass for s > 0).
Eigen::MatrixXd dw_star(const Model& m, double tau, const Eigen::VectorXd& eta);

/// dG/deta(tau,eta) = X(tau,0) [ dy/deta(0,tau,eta) + dw*/deta(0;(tau,eta)) ].
Eigen::MatrixXd dG_map(const Model& m, double tau, const Eigen::VectorXd& eta);

/// dH/dxi(tau,xi) = [dG/deta(tau, H(tau,xi))]^{-1}.
Eigen::MatrixXd dH_map(const Model& m, double tau, const Eigen::VectorXd& xi,
                       double* condition_number = nullptr);

/// d2w*/deta2(0;(tau,eta)); slice k as in NonlinearitySpec::d2f.
std::vector<Eigen::MatrixXd> d2w_star(const Model& m, double tau,
                                      const Eigen::VectorXd& eta);

DerivativeBundle derivative_bundle(const Model& m, double tau,
                                   const Eigen::VectorXd& xi, bool second_order);

/// Second-variation bound from the iterated Gronwall argument:
/// exp(int_tau^s a) * int_tau^s V(p) exp(2 int_tau^p a) dp with a = growth(r).
double iterated_gronwall_bound(const std::function<double(double)>& growth,
                               const std::function<double(double)>& V,
                               double tau, double s, double tol);

/// Closed form of the bound for constant growth M+nu and V = zeta e^{-eps2 p}.
double iterated_gronwall_closed_form(double M, double nu, double zeta,
                                     double eps2, double tau, double s);

/// Model-level second-derivative bound using ||A(r)|| + v(r) and the V envelope.
double second_derivative_bound(const Model& m, double s, double tau);

struct SecondOrderCertificate {
    bool rate1_ok = false; // 3M < lambda + eps2
    bool rate2_ok = false; // 2M < lambda + eps2 - eps1
    double value = 0.0;    // truncated integral when certified
    bool passed = false;
    std::string diagnostic;
};

/// Integral condition for C2 smoothness of eta -> w*(0;(tau,eta)), evaluated
/// on the named corollary parameters.
SecondOrderCertificate verify_second_order_condition(const Model& m, double tau);

} // namespace conjlab
