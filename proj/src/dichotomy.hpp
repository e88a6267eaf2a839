#pragma once

#include "model.hpp"

#include <utility>

namespace conjlab {

/// P(t) = X(t,0) P0 X(0,t).
Eigen::MatrixXd projector_at(const Model& m, double t);

/// X(t,s)P(s) for t >= s, -X(t,s)Q(s) for t < s.
Eigen::MatrixXd greens_operator(const Model& m, double t, double s);

/// Log-spaced |t-s| offsets from each base point in [0, s_max].
std::vector<std::pair<double, double>> default_c1_grid(double s_max,
                                                       int n_base = 11,
                                                       int n_offsets = 8);

C1Report verify_c1(const Model& m,
                   const std::vector<std::pair<double, double>>& grid);

C2C3Report verify_c2_c3(const Model& m, const std::vector<double>& t_grid);
std::vector<double> default_t_grid(double t_sup = 10.0, int n = 101);

C5Report verify_c5(const Model& m, const std::vector<double>& taus);

enum class CorollaryLevel {
    c1,       // C1 linearization hypotheses (exponential or nonuniform form)
    c2_smooth // second-order smoothness theorem inequalities
};

struct CorollaryCheck {
    std::string inequality;
    double lhs = 0.0;
    double rhs = 0.0;
    bool passed = false;
};

struct CorollaryReport {
    std::vector<CorollaryCheck> checks;
    bool all_passed = false;
};

CorollaryReport corollary_conditions(const Model& m, CorollaryLevel level);

/// Runs c1, c2/c3 and c5 on default grids and caches the result on the model.
const VerificationSummary& verify_all(const Model& m);

} // namespace conjlab
