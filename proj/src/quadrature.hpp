#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace conjlab {

using Integrand = std::function<Eigen::VectorXd(double)>;

/// Closed-form bound on the tail mass of an integrand: tail(T) >= ∫_T^∞ |g|.
struct TailEnvelope {
    std::function<double(double)> tail;
    double start = 0.0;
};

/// Envelope c·e^{-a s}; tail is c/a·e^{-a T}, infinite when a <= 0 and c > 0.
TailEnvelope exp_tail(double coef, double rate, double start = 0.0);

struct QuadResult {
    Eigen::VectorXd value;
    double tail_bound = 0.0;
    double abs_error = 0.0;
    double horizon = 0.0;
};

/// Adaptive Gauss-Kronrod 7(15) over [a, b]. Panels never straddle any of
/// `breaks` (kink locations).
Eigen::VectorXd integrate_adaptive(const Integrand& g, int dim, double a, double b,
                                   double tol, double* abs_error = nullptr,
                                   const std::vector<double>& breaks = {});

/// Truncated improper integral ∫_a^∞ g with certified tail bound. The horizon
/// doubles from max(split, a, 10) until env.tail(T) <= tol; panels are keyed
/// at `split` (Green's kernel kink). Throws on horizon exhaustion.
QuadResult integrate_half_line(const Integrand& g, int dim, double split,
                               const TailEnvelope& env, double tol, double a = 0.0,
                               double horizon_cap = 200.0);

/// Uncertified variant for integrands with no usable closed-form envelope:
/// the horizon doubles until the last segment's contribution falls below tol
/// and is decreasing; tail_bound reports the (heuristic) last-segment mass.
QuadResult integrate_half_line_empirical(const Integrand& g, int dim, double split,
                                         double tol, double a = 0.0,
                                         double horizon_cap = 200.0);

/// Prefix integrals of g at `nodes` (strictly increasing): out[i] = ∫_{nodes[0]}^{nodes[i]} g.
std::vector<Eigen::VectorXd> integrate_cumulative(const Integrand& g, int dim,
                                                  const std::vector<double>& nodes,
                                                  double tol);

} // namespace conjlab
