#pragma once

#include "flows.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace conjlab {

struct DichotomySpec {
    Eigen::MatrixXd P0;                 // projector at time 0
    std::function<double(double)> K;    // s -> K(s) >= 0
    std::function<double(double)> h;    // t -> h(t) in (0,1], decreasing, h(0)=1
    Envelope Kh;                        // dominating envelope for K(s)h(s)
    std::map<std::string, double> params; // named constants for corollary settings
};

struct C1Report {
    double margin_p = 0.0; // max ||X(t,s)P(s)|| / (K(s) h(t)/h(s)) over t >= s
    double margin_q = 0.0; // Q analogue over t <= s
    bool passed = false;
    int pairs_checked = 0;
};

struct C2C3Report {
    double p_hat = 0.0;
    double q_hat = 0.0;
    bool c2_passed = false;
    bool c3_passed = false;
    double tail_bound = 0.0;
    double t_sup = 0.0;
    int t_count = 0;
};

struct C5Report {
    std::vector<double> taus;
    std::vector<double> values;
    std::vector<bool> passed;
    std::vector<std::string> diagnostics;
    bool all_passed = false;
};

struct VerificationSummary {
    C1Report c1;
    C2C3Report c23;
    C5Report c5;
    bool fatal = false; // q_hat >= 1: contraction hypothesis broken
};

struct Tolerances {
    OdeOptions ode;
    double quad_tol = 1e-10;
    double fp_tol = 1e-10;
    int fp_max_iter = 200;
    double horizon_cap = 200.0;
    double grid_spacing = 0.05;
    double grid_min_span = 10.0;
};

/// A fully wired system: linear part, perturbation, dichotomy data, and the
/// numeric knobs. Cached fundamental solutions and the verification summary
/// are lazily populated.
struct Model {
    LinearSystemSpec sys;
    NonlinearitySpec nl;
    DichotomySpec dich;
    Tolerances tol;

    mutable std::shared_ptr<FundamentalPair> fund;
    mutable std::optional<VerificationSummary> verification;

    FundamentalPair& fundamentals() const {
        if (!fund) fund = std::make_shared<FundamentalPair>(sys, tol.ode);
        return *fund;
    }

    bool has_unstable_direction() const {
        Eigen::MatrixXd Q0 =
            Eigen::MatrixXd::Identity(sys.dim, sys.dim) - dich.P0;
        return Q0.norm() > 1e-14;
    }

    double param(const std::string& name) const;
    bool has_param(const std::string& name) const;
};

} // namespace conjlab
