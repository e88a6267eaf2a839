#include "ode.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace conjlab {

void DenseTrajectory::push_back(double t, Eigen::VectorXd y, Eigen::VectorXd dy) {
    if (!ts_.empty() && t <= ts_.back())
        fail(ErrorCode::invalid_argument, "DenseTrajectory: non-increasing sample time");
    ts_.push_back(t);
    ys_.push_back(std::move(y));
    dys_.push_back(std::move(dy));
}

void DenseTrajectory::push_front(double t, Eigen::VectorXd y, Eigen::VectorXd dy) {
    if (!ts_.empty() && t >= ts_.front())
        fail(ErrorCode::invalid_argument, "DenseTrajectory: non-decreasing front sample time");
    ts_.insert(ts_.begin(), t);
    ys_.insert(ys_.begin(), std::move(y));
    dys_.insert(dys_.begin(), std::move(dy));
}

Eigen::VectorXd DenseTrajectory::eval(double t) const {
    if (ts_.empty())
        fail(ErrorCode::invalid_argument, "DenseTrajectory: empty");
    if (t <= ts_.front()) {
        if (ts_.front() - t > 1e-9)
            fail(ErrorCode::invalid_argument, "DenseTrajectory: query below stored range");
        return ys_.front();
    }
    if (t >= ts_.back()) {
        if (t - ts_.back() > 1e-9)
            fail(ErrorCode::invalid_argument, "DenseTrajectory: query above stored range");
        return ys_.back();
    }
    auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - ts_.begin()) - 1;
    double t0 = ts_[i], t1 = ts_[i + 1];
    if (t == t0) return ys_[i];
    double h = t1 - t0;
    double th = (t - t0) / h;
    const Eigen::VectorXd& y0 = ys_[i];
    const Eigen::VectorXd& y1 = ys_[i + 1];
    Eigen::VectorXd dy = y1 - y0;
    Eigen::VectorXd a = h * dys_[i] - dy;
    Eigen::VectorXd b = -h * dys_[i + 1] + dy;
    return (1.0 - th) * y0 + th * y1 + th * (1.0 - th) * ((1.0 - th) * a + th * b);
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

} // namespace

AdaptiveRk45::AdaptiveRk45(RhsFn rhs, OdeOptions opts)
    : rhs_(std::move(rhs)), opts_(opts) {}

Eigen::VectorXd AdaptiveRk45::integrate(double t0, const Eigen::VectorXd& y0, double t1,
                                        DenseTrajectory* dense) const {
    const Eigen::Index n = y0.size();
    Eigen::VectorXd y = y0;
    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);

    rhs_(t0, y, k1);
    if (dense && dense->empty())
        dense->push_back(t0, y, k1);

    if (t1 == t0) return y;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const bool forward = dir > 0.0;

    double t = t0;
    double h = dir * std::min(opts_.max_step, std::abs(t1 - t0));
    std::size_t steps = 0;

    while (dir * (t1 - t) > 0.0) {
        if (++steps > opts_.max_steps) {
            std::ostringstream os;
            os << "integrator step limit exceeded on [" << t0 << ", " << t1
               << "], stalled near t=" << t;
            fail(ErrorCode::integrator_failure, os.str());
        }
        if (dir * (t + h - t1) > 0.0) h = t1 - t;

        ytmp = y + h * (a21 * k1);
        rhs_(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        rhs_(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs_(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs_(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs_(t + h, ytmp, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs_(t + h, ynew, k7);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double norm = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double sc = opts_.abs_tol +
                        opts_.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            double r = err[i] / sc;
            norm += r * r;
        }
        norm = std::sqrt(norm / static_cast<double>(n));

        if (!std::isfinite(norm)) {
            std::ostringstream os;
            os << "integrator produced non-finite state on [" << t << ", " << t + h << "]";
            fail(ErrorCode::integrator_failure, os.str());
        }

        if (norm <= 1.0) {
            t += h;
            y.swap(ynew);
            k1.swap(k7); // FSAL
            if (dense) {
                if (forward)
                    dense->push_back(t, y, k1);
                else
                    dense->push_front(t, y, k1);
            }
        }

        double factor = norm == 0.0 ? 5.0 : 0.9 * std::pow(norm, -0.2);
        factor = std::clamp(factor, 0.2, 5.0);
        h *= factor;
        if (std::abs(h) > opts_.max_step) h = dir * opts_.max_step;
        if (std::abs(h) < opts_.min_step) {
            std::ostringstream os;
            os << "integrator step underflow near t=" << t << " on [" << t0 << ", " << t1
               << "]";
            fail(ErrorCode::integrator_failure, os.str());
        }
    }
    return y;
}

DenseTrajectory dense_solve(const RhsFn& rhs, double t0, const Eigen::VectorXd& y0,
                            double lo, double hi, const OdeOptions& opts) {
    if (lo > t0 || hi < t0)
        fail(ErrorCode::invalid_argument, "dense_solve: t0 outside [lo, hi]");
    AdaptiveRk45 solver(rhs, opts);
    DenseTrajectory traj;
    if (lo < t0)
        solver.integrate(t0, y0, lo, &traj); // fills [lo, t0] via push_front
    if (hi > t0 || traj.empty())
        solver.integrate(t0, y0, hi, &traj);
    return traj;
}

void extend_dense(DenseTrajectory& traj, const RhsFn& rhs, double hi,
                  const OdeOptions& opts) {
    if (traj.empty())
        fail(ErrorCode::invalid_argument, "extend_dense: empty trajectory");
    if (hi <= traj.back_time()) return;
    AdaptiveRk45 solver(rhs, opts);
    Eigen::VectorXd y = traj.back_value();
    solver.integrate(traj.back_time(), y, hi, &traj);
}

} // namespace conjlab
