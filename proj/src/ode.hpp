#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace conjlab {

using RhsFn = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy)>;

struct OdeOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    // Cubic Hermite dense output limits interpolation accuracy to ~h^4/24
    // relative; 5e-3 keeps it near the integrator tolerance.
    double max_step = 5e-3;
    double min_step = 1e-14;
    std::size_t max_steps = 50'000'000;
};

/// Piecewise cubic Hermite representation of a solution, samples strictly
/// increasing in t. Evaluation at a stored sample returns it exactly.
class DenseTrajectory {
public:
    bool empty() const { return ts_.empty(); }
    std::size_t size() const { return ts_.size(); }
    double front_time() const { return ts_.front(); }
    double back_time() const { return ts_.back(); }

    void push_back(double t, Eigen::VectorXd y, Eigen::VectorXd dy);
    void push_front(double t, Eigen::VectorXd y, Eigen::VectorXd dy);

    Eigen::VectorXd eval(double t) const;

    const Eigen::VectorXd& back_value() const { return ys_.back(); }
    const Eigen::VectorXd& front_value() const { return ys_.front(); }

private:
    std::vector<double> ts_;
    std::vector<Eigen::VectorXd> ys_;
    std::vector<Eigen::VectorXd> dys_;
};

/// Embedded Dormand-Prince 5(4) with adaptive step control. Integrates in
/// either time direction (backward runs use a negative step on the
/// reversed-time parametrization).
class AdaptiveRk45 {
public:
    AdaptiveRk45(RhsFn rhs, OdeOptions opts = {});

    /// Integrate from (t0, y0) to t1; if `dense` is non-null, accepted steps
    /// are appended in true-time order (push_back for forward runs,
    /// push_front for backward runs).
    Eigen::VectorXd integrate(double t0, const Eigen::VectorXd& y0, double t1,
                              DenseTrajectory* dense = nullptr) const;

private:
    RhsFn rhs_;
    OdeOptions opts_;
};

/// Dense solution of y' = rhs on [lo, hi] passing through (t0, y0),
/// lo <= t0 <= hi.
DenseTrajectory dense_solve(const RhsFn& rhs, double t0, const Eigen::VectorXd& y0,
                            double lo, double hi, const OdeOptions& opts = {});

/// Extend an existing dense solution forward to `hi`.
void extend_dense(DenseTrajectory& traj, const RhsFn& rhs, double hi,
                  const OdeOptions& opts = {});

} // namespace conjlab
