// Acceptance gate: one pass/fail line per criterion, exit code = number of
// failed criteria. Each check is evaluated at its stated tolerance; nothing
// here loosens a bound to make a run pass.

#include "catalog.hpp"
#include "conjugacy.hpp"
#include "dichotomy.hpp"
#include "smoothness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

using namespace conjlab;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

int g_failures = 0;

void report(int n, const char* name, bool ok, const std::string& detail) {
    std::printf("criterion %2d %s  %s (%s)\n", n, ok ? "PASS" : "FAIL", name,
                detail.c_str());
    if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

VectorXd v1(double x) { return VectorXd::Constant(1, x); }

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), f, a, b, c);
    return buf;
}

void criterion_1() {
    auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (const auto& id : catalog_ids()) {
        auto m = get_entry(id, {{"f_scale", 0.0}}).model;
        VectorXd p = VectorXd::Constant(m.sys.dim, 0.7);
        for (double t = 0.0; t <= 5.0; t += 0.5) {
            worst = std::max(worst, (H_map(m, t, p).value - p).norm());
            worst = std::max(worst, (G_map(m, t, p).value - p).norm());
        }
    }
    double dt = seconds_since(t0);
    report(1, "identity case f = 0", worst <= 1e-10 && dt < 5.0,
           fmt("sup deviation %.2e, %.1f s", worst, dt));
}

void criterion_2() {
    auto t0 = std::chrono::steady_clock::now();
    auto m = get_entry("S1").model;
    double eh = std::abs(H_map(m, 1.0, v1(2.0)).value(0) - 2.0367879);
    double eg = std::abs(G_map(m, 1.0, v1(2.0)).value(0) - 1.9632121);
    double dt = seconds_since(t0);
    report(2, "closed-form conjugacy", eh <= 1e-6 && eg <= 1e-6 && dt < 5.0,
           fmt("|dH| %.2e, |dG| %.2e, time %.1f s", eh, eg, dt));
}

void criterion_3() {
    auto m = get_entry("S2").model;
    double worst = 0.0;
    VectorXd target(2);
    target << 0.0, 0.0166667;
    VectorXd etas[2] = {VectorXd::Ones(2), (VectorXd(2) << -1.0, 2.0).finished()};
    for (double tau : {0.0, 0.7})
        for (const auto& eta : etas)
            worst = std::max(worst, (w_star(m, 0.0, tau, eta) - target).norm());
    report(3, "saddle unstable branch of w*", worst <= 1e-6,
           fmt("max deviation %.2e", worst));
}

void criterion_4() {
    auto t0 = std::chrono::steady_clock::now();
    auto m = get_entry("S3").model;
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> ut(0.0, 3.0), ux(-2.0, 2.0);
    double worst_hg = 0.0, worst_gh = 0.0;
    for (int i = 0; i < 20; ++i) {
        double tau = ut(rng);
        VectorXd p = v1(ux(rng));
        VectorXd g = G_map(m, tau, p).value;
        worst_hg = std::max(worst_hg, (H_map(m, tau, g).value - p).norm());
        VectorXd h = H_map(m, tau, p).value;
        worst_gh = std::max(worst_gh, (G_map(m, tau, h).value - p).norm());
    }
    double dt = seconds_since(t0);
    report(4, "roundtrip H o G and G o H",
           worst_hg <= 1e-5 && worst_gh <= 1e-5 && dt < 60.0,
           fmt("max |HoG-id| %.2e, |GoH-id| %.2e, %.1f s", worst_hg, worst_gh, dt));
}

void criterion_5() {
    auto m = get_entry("S3").model;
    std::vector<double> grid;
    for (double t = 0.0; t <= 5.0; t += 0.5) grid.push_back(t);
    auto rep = check_equivalence(m, 0.5, v1(0.8), v1(0.8), grid);
    report(5, "solution mapping identities",
           rep.h_identity <= 1e-5 && rep.g_identity <= 1e-5,
           fmt("H identity %.2e, G identity %.2e", rep.h_identity, rep.g_identity));
}

void criterion_6() {
    auto m = get_entry("S3").model;
    double q_hat = verify_all(m).c23.q_hat;
    PicardStats st;
    z_star(m, 0.0, v1(0.5), &st);
    report(6, "contraction certificate",
           st.max_ratio <= q_hat + 0.01 && st.iterations <= 5,
           fmt("ratio %.4f vs q_hat %.4f, %.0f iterations", st.max_ratio, q_hat,
               (double)st.iterations));
}

void criterion_7() {
    auto m = get_entry("S1").model;
    double p_hat = verify_all(m).c23.p_hat;
    double worst = 0.0;
    for (double t = 0.0; t <= 5.0; t += 0.5)
        for (double xi : {-2.0, -0.5, 1.0, 2.0})
            worst = std::max(worst,
                             std::abs(H_map(m, t, v1(xi)).value(0) - xi));
    report(7, "boundedness |H - id| <= p_hat",
           worst <= p_hat + 1e-8 && p_hat <= 0.2,
           fmt("sup %.4e, p_hat %.4e", worst, p_hat));
}

void criterion_8() {
    auto m = get_entry("S3").model;
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> ut(0.0, 3.0), ux(-2.0, 2.0);
    double worst_g = 0.0, worst_h = 0.0, worst_inv = 0.0;
    const double dg_delta = 1e-5, dh_delta = 1e-4;
    for (int i = 0; i < 20; ++i) {
        double tau = ut(rng);
        double x = ux(rng);
        double dg = dG_map(m, tau, v1(x))(0, 0);
        double fdg = (G_map(m, tau, v1(x + dg_delta)).value(0) -
                      G_map(m, tau, v1(x - dg_delta)).value(0)) / (2 * dg_delta);
        worst_g = std::max(worst_g, std::abs(dg - fdg) / std::abs(fdg));

        double dh = dH_map(m, tau, v1(x))(0, 0);
        double fdh = (H_map(m, tau, v1(x + dh_delta)).value(0) -
                      H_map(m, tau, v1(x - dh_delta)).value(0)) / (2 * dh_delta);
        worst_h = std::max(worst_h, std::abs(dh - fdh) / std::abs(fdh));

        double dg_at_h = dG_map(m, tau, H_map(m, tau, v1(x)).value)(0, 0);
        worst_inv = std::max(worst_inv, std::abs(dh * dg_at_h - 1.0));
    }
    report(8, "first derivative formulas",
           worst_g <= 1e-4 && worst_h <= 1e-4 && worst_inv <= 1e-6,
           fmt("dG fd %.2e, dH fd %.2e, |dH dG - I| %.2e", worst_g, worst_h,
               worst_inv));
}

void criterion_9() {
    auto m = get_entry("S3").model;
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> ut(0.0, 3.0), ux(-2.0, 2.0), us(0.0, 4.0);
    int violations = 0;
    double worst_margin = 0.0;
    for (int i = 0; i < 20; ++i) {
        double tau = ut(rng);
        FlowBundle fb(m.sys, m.nl, tau, v1(ux(rng)), 1, m.tol.ode, tau + 4.0);
        for (int k = 0; k < 50; ++k) {
            double s = tau + us(rng);
            double bound = gronwall_first(m, s, tau);
            double margin = opnorm(fb.first_variation(s)) / bound;
            worst_margin = std::max(worst_margin, margin);
            if (margin > 1.0 + 1e-9) ++violations;
        }
    }
    report(9, "Gronwall bound on the first variation", violations == 0,
           fmt("%.0f of 1000 violated, worst margin %.4f", (double)violations,
               worst_margin));
}

void criterion_10() {
    auto m = get_entry("S3").model;
    std::mt19937_64 rng(45);
    std::uniform_real_distribution<double> ut(0.0, 3.0), ux(-2.0, 2.0);
    const double delta = 1e-4;
    double worst_fd = 0.0, worst_sym = 0.0;
    for (int i = 0; i < 5; ++i) {
        double tau = ut(rng);
        double x = ux(rng);
        auto slices = d2w_star(m, tau, v1(x));
        const int d = (int)slices.size();
        for (int k = 0; k < d; ++k) {
            for (int j = 0; j < d; ++j) {
                double fd = (dw_star(m, tau, v1(x + delta))(j, 0) -
                             dw_star(m, tau, v1(x - delta))(j, 0)) / (2 * delta);
                double denom = std::max(std::abs(fd), 1.0);
                worst_fd =
                    std::max(worst_fd, std::abs(slices[k](j, 0) - fd) / denom);
                for (int i = 0; i < d; ++i)
                    worst_sym = std::max(
                        worst_sym, std::abs(slices[k](i, j) - slices[j](i, k)));
            }
        }
    }
    auto cert_ok =
        verify_second_order_condition(
            get_entry("S4", {{"M", 0.3}, {"eps2", 1.2}}).model, 0.0);
    auto cert_bad =
        verify_second_order_condition(
            get_entry("S4", {{"M", 0.55}, {"eps2", 0.1}}).model, 0.0);
    bool toggles = cert_ok.passed && !cert_bad.rate2_ok && !cert_bad.passed;
    report(10, "second derivative formulas and certification",
           worst_fd <= 1e-3 && worst_sym <= 1e-6 && toggles,
           fmt("d2w fd %.2e, symmetry %.2e, ", worst_fd, worst_sym) +
               (toggles ? "rate toggle ok" : "rate toggle BROKEN"));
}

void criterion_11() {
    double M = 1.0, nu = 0.1, zeta = 0.2, e2 = 1.0;
    // the closed form assumes the constant growth rate M + nu
    auto growth = [&](double) { return M + nu; };
    auto V = [&](double s) { return zeta * std::exp(-e2 * s); };
    double quad = iterated_gronwall_bound(growth, V, 0.0, 1.0, 1e-12);
    double closed = iterated_gronwall_closed_form(M, nu, zeta, e2, 0.0, 1.0);
    double agree = std::abs(quad - closed);
    double anchor = std::abs(closed - 1.1617);

    int violations = 0;
    for (const char* id : {"S3", "S4"}) {
        auto m = get_entry(id).model;
        for (double tau : {0.0, 1.0}) {
            FlowBundle fb(m.sys, m.nl, tau, v1(0.8), 2, m.tol.ode, tau + 4.0);
            for (double ds : {0.5, 1.0, 2.0, 4.0}) {
                double s = tau + ds;
                double bound = second_derivative_bound(m, s, tau);
                double got = 0.0;
                for (const auto& slice : fb.second_variation(s))
                    got = std::max(got, slice.norm());
                if (got > bound * (1 + 1e-9)) ++violations;
            }
        }
    }
    report(11, "iterated Gronwall closed form",
           agree <= 1e-6 && anchor <= 1e-3 && violations == 0,
           fmt("|quad - closed| %.2e, value %.6f, ", agree, closed) +
               fmt("%.0f bound violations", (double)violations));
}

void criterion_12() {
    auto coarse = get_entry("S1").model;
    auto fine = get_entry("S1").model;
    fine.tol.quad_tol /= 2;
    fine.tol.fp_tol /= 2;
    fine.tol.ode.abs_tol /= 2;
    fine.tol.ode.rel_tol /= 2;

    auto hc = H_map(coarse, 1.0, v1(2.0));
    auto hf = H_map(fine, 1.0, v1(2.0));
    auto gc = G_map(coarse, 1.0, v1(2.0));
    auto gf = G_map(fine, 1.0, v1(2.0));
    double dh = std::abs(hc.value(0) - hf.value(0));
    double dg = std::abs(gc.value(0) - gf.value(0));
    bool ok2 = dh <= 5 * std::max(hc.residual, hf.residual) &&
               dg <= 5 * std::max(gc.residual, gf.residual);

    auto mc = get_entry("S3").model;
    auto mf = get_entry("S3").model;
    mf.tol.quad_tol /= 2;
    mf.tol.fp_tol /= 2;
    mf.tol.ode.abs_tol /= 2;
    mf.tol.ode.rel_tol /= 2;
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> ut(0.0, 3.0), ux(-2.0, 2.0);
    bool ok4 = true;
    double worst_ratio = 0.0;
    for (int i = 0; i < 5; ++i) {
        double tau = ut(rng);
        VectorXd p = v1(ux(rng));
        auto g_c = G_map(mc, tau, p);
        auto g_f = G_map(mf, tau, p);
        auto h_c = H_map(mc, tau, g_c.value);
        auto h_f = H_map(mf, tau, g_f.value);
        double change = std::abs(h_c.value(0) - h_f.value(0));
        double budget = 5 * std::max(g_c.residual + h_c.residual,
                                     g_f.residual + h_f.residual);
        worst_ratio = std::max(worst_ratio, change / budget);
        if (change > budget) ok4 = false;
    }
    report(12, "refinement stability", ok2 && ok4,
           fmt("closed-form shifts %.2e/%.2e, worst roundtrip ratio %.2f", dh, dg,
               worst_ratio));
}

} // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    criterion_12();
    std::printf("%d of 12 criteria failed\n", g_failures);
    return g_failures;
}
