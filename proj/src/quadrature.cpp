#include "quadrature.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace conjlab {

namespace {

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1] (positive half).
constexpr double xgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr double wgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double wg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Panel {
    double a, b;
    Eigen::VectorXd value;
    double error;
};

Panel gk15(const Integrand& g, int dim, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    Eigen::VectorXd k = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd gauss = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < 8; ++i) {
        Eigen::VectorXd fsum;
        if (i == 7) {
            fsum = g(c);
        } else {
            fsum = g(c - h * xgk[i]);
            fsum += g(c + h * xgk[i]);
        }
        k += wgk[i] * fsum;
        if (i % 2 == 1) gauss += wg[i / 2] * fsum; // odd indices are the G7 nodes
    }
    Panel p;
    p.a = a;
    p.b = b;
    p.value = h * k;
    p.error = h * (k - gauss).cwiseAbs().maxCoeff();
    return p;
}

} // namespace

TailEnvelope exp_tail(double coef, double rate, double start) {
    TailEnvelope env;
    env.start = start;
    env.tail = [coef, rate](double T) {
        if (coef == 0.0) return 0.0;
        if (rate <= 0.0) return std::numeric_limits<double>::infinity();
        return coef / rate * std::exp(-rate * T);
    };
    return env;
}

Eigen::VectorXd integrate_adaptive(const Integrand& g, int dim, double a, double b,
                                   double tol, double* abs_error,
                                   const std::vector<double>& breaks) {
    if (b < a) fail(ErrorCode::invalid_argument, "integrate_adaptive: b < a");
    if (b == a) {
        if (abs_error) *abs_error = 0.0;
        return Eigen::VectorXd::Zero(dim);
    }
    std::vector<double> edges{a};
    for (double x : breaks)
        if (x > a && x < b) edges.push_back(x);
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::vector<Panel> panels;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        panels.push_back(gk15(g, dim, edges[i], edges[i + 1]));

    const std::size_t panel_cap = 20000;
    for (;;) {
        double total_err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < panels.size(); ++i) {
            total_err += panels[i].error;
            if (panels[i].error > panels[worst].error) worst = i;
        }
        if (total_err <= tol || panels[worst].error == 0.0) {
            Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim);
            for (const Panel& p : panels) sum += p.value;
            if (abs_error) *abs_error = total_err;
            return sum;
        }
        if (panels.size() >= panel_cap) {
            std::ostringstream os;
            os << "adaptive quadrature stalled: " << panels.size()
               << " panels, error " << total_err << " > tol " << tol;
            fail(ErrorCode::iteration_limit, os.str());
        }
        Panel p = panels[worst];
        double mid = 0.5 * (p.a + p.b);
        if (mid <= p.a || mid >= p.b) {
            // Interval at rounding resolution; accept its estimate.
            panels[worst].error = 0.0;
            continue;
        }
        panels[worst] = gk15(g, dim, p.a, mid);
        panels.push_back(gk15(g, dim, mid, p.b));
    }
}

QuadResult integrate_half_line(const Integrand& g, int dim, double split,
                               const TailEnvelope& env, double tol, double a,
                               double horizon_cap) {
    if (tol <= 0.0) fail(ErrorCode::invalid_argument, "integrate_half_line: tol <= 0");
    double T = std::max({split, a, env.start, 10.0});
    while (env.tail(T) > tol) {
        if (T >= horizon_cap) {
            std::ostringstream os;
            os << "truncation horizon exhausted at T=" << T << ", tail bound "
               << env.tail(T) << " > tol " << tol;
            fail(ErrorCode::truncation, os.str());
        }
        T = std::min(2.0 * T, horizon_cap);
    }
    QuadResult res;
    res.horizon = T;
    res.tail_bound = env.tail(T);
    res.value = integrate_adaptive(g, dim, a, T, tol, &res.abs_error, {split});
    return res;
}

QuadResult integrate_half_line_empirical(const Integrand& g, int dim, double split,
                                         double tol, double a, double horizon_cap) {
    if (tol <= 0.0) fail(ErrorCode::invalid_argument, "tol <= 0");
    double T = std::max({split, a, 10.0});
    double err = 0.0;
    Eigen::VectorXd total = integrate_adaptive(g, dim, a, T, tol, &err, {split});
    double last_mass = std::numeric_limits<double>::infinity();
    for (;;) {
        double Tn = std::min(2.0 * T, horizon_cap);
        if (Tn <= T) {
            std::ostringstream os;
            os << "empirical truncation failed at cap T=" << T << ", last segment mass "
               << last_mass << " > tol " << tol;
            fail(ErrorCode::truncation, os.str());
        }
        double seg_err = 0.0;
        Eigen::VectorXd seg =
            integrate_adaptive([&g](double s) { return g(s).cwiseAbs().eval(); }, dim, T,
                               Tn, tol, &seg_err, {});
        double mass = seg.maxCoeff();
        total += integrate_adaptive(g, dim, T, Tn, tol, &seg_err, {});
        err += seg_err;
        bool decreasing = mass < last_mass;
        last_mass = mass;
        T = Tn;
        if (mass <= tol && decreasing) {
            QuadResult res;
            res.value = std::move(total);
            res.tail_bound = mass;
            res.abs_error = err;
            res.horizon = T;
            return res;
        }
    }
}

std::vector<Eigen::VectorXd> integrate_cumulative(const Integrand& g, int dim,
                                                  const std::vector<double>& nodes,
                                                  double tol) {
    if (nodes.size() < 2)
        fail(ErrorCode::invalid_argument, "integrate_cumulative: need >= 2 nodes");
    std::vector<Eigen::VectorXd> out(nodes.size());
    out[0] = Eigen::VectorXd::Zero(dim);
    const double local_tol = tol / static_cast<double>(nodes.size() - 1);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        Eigen::VectorXd piece =
            integrate_adaptive(g, dim, nodes[i], nodes[i + 1], local_tol);
        out[i + 1] = out[i] + piece;
    }
    return out;
}

} // namespace conjlab
