#pragma once

#include "model.hpp"

namespace conjlab {

/// Bounded continuous function sampled on a finite grid. Piecewise-cubic
/// between nodes; past the last node values follow the K(s)h(s)u(s)-type
/// exponential decay that the true fixed point obeys.
struct GridFunction {
    std::vector<double> nodes;
    std::vector<Eigen::VectorXd> values;
    double decay_rate = 0.0; // extension rate past nodes.back()

    Eigen::VectorXd eval(double t) const;
    double sup_norm() const;
    int dim() const { return values.empty() ? 0 : static_cast<int>(values[0].size()); }
};

GridFunction zero_grid_function(const std::vector<double>& nodes, int dim,
                                double decay_rate);

/// Uniform grid on [0, max(2*tau, min_span)] at the configured spacing, with
/// tau and any extra query times inserted as exact nodes.
std::vector<double> working_grid(const Model& m, double tau,
                                 const std::vector<double>& extra = {});

struct ConjugacyResult {
    Eigen::VectorXd value;
    Eigen::VectorXd correction;
    int iterations = 0;
    double residual = 0.0;
    double tail_bound = 0.0;
};

struct PicardStats {
    int iterations = 0;
    double last_diff = 0.0;
    double max_ratio = 0.0; // measured contraction ratio
    double residual = 0.0;
};

/// w*(t;(tau,eta)) = -int_0^inf G(t,s) f(s, y(s,tau,eta)) ds.
Eigen::VectorXd w_star(const Model& m, double t, double tau,
                       const Eigen::VectorXd& eta, double* tail_bound = nullptr);

/// One Picard step: (T phi)(t) = int_0^inf G(t,s) f(s, x(s,tau,xi) + phi(s)) ds
/// sampled on phi's grid.
GridFunction apply_T(const Model& m, const GridFunction& phi, double tau,
                     const Eigen::VectorXd& xi);

/// Fixed point of T by Picard iteration from 0.
GridFunction z_star(const Model& m, double tau, const Eigen::VectorXd& xi,
                    PicardStats* stats = nullptr,
                    const std::vector<double>& extra_nodes = {});

/// H(t, xi) = xi + z*(t;(t, xi)).
ConjugacyResult H_map(const Model& m, double t, const Eigen::VectorXd& xi);

/// G(t, eta) = eta + w*(t;(t, eta)).
ConjugacyResult G_map(const Model& m, double t, const Eigen::VectorXd& eta);

/// G(tau, eta) through the anchor identity X(tau,0){y(0,tau,eta) + w*(0;(tau,eta))}.
Eigen::VectorXd G_map_anchored(const Model& m, double tau,
                               const Eigen::VectorXd& eta);

struct EquivalenceReport {
    double h_identity = 0.0;  // sup_t |H[t, x(t,tau,xi)] - y(t,tau,H(tau,xi))|
    double g_identity = 0.0;  // sup_t |G[t, y(t,tau,eta)] - X(t,tau) G(tau,eta)|
    double h_roundtrip = 0.0; // |H(tau, G(tau,eta)) - eta|
    double g_roundtrip = 0.0; // |G(tau, H(tau,xi)) - xi|
    double h_bound = 0.0;     // sup_t |H(t,·) - id| along the orbit
    double g_bound = 0.0;
    double p_hat = 0.0;
    bool passed = false;
};

EquivalenceReport check_equivalence(const Model& m, double tau,
                                    const Eigen::VectorXd& xi,
                                    const Eigen::VectorXd& eta,
                                    const std::vector<double>& t_grid);

} // namespace conjlab
