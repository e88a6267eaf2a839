#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "catalog.hpp"
#include "conjugacy.hpp"
#include "dichotomy.hpp"
#include "errors.hpp"

#include <cmath>
#include <random>

using namespace conjlab;
using Eigen::VectorXd;

namespace {
VectorXd v1(double x) { return VectorXd::Constant(1, x); }
}

TEST_CASE("grid function is exact at nodes and decays past the end") {
    GridFunction g;
    g.nodes = {0.0, 1.0, 2.0, 3.0};
    for (double t : g.nodes) g.values.push_back(v1(std::sin(t)));
    g.decay_rate = 2.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        CHECK(g.eval(g.nodes[i])(0) == g.values[i](0));
    CHECK(g.eval(4.0)(0) ==
          doctest::Approx(std::sin(3.0) * std::exp(-2.0)).epsilon(1e-12));
    CHECK(g.sup_norm() == doctest::Approx(std::abs(std::sin(2.0))));
}

TEST_CASE("working grid carries tau and query times as exact nodes") {
    auto m = get_entry("S1").model;
    auto nodes = working_grid(m, 1.23, {4.567});
    CHECK(std::count(nodes.begin(), nodes.end(), 1.23) == 1);
    CHECK(std::count(nodes.begin(), nodes.end(), 4.567) == 1);
    CHECK(std::is_sorted(nodes.begin(), nodes.end()));
    CHECK(nodes.front() == 0.0);
    CHECK(nodes.back() >= 10.0);
}

TEST_CASE("w_star closed forms") {
    auto off = get_entry("S1", {{"f_scale", 0.0}}).model;
    CHECK(w_star(off, 1.0, 1.0, v1(2.0)).norm() == 0.0);

    auto m1 = get_entry("S1").model;
    // -int_0^t e^{-(t-s)} 0.1 e^{-s} ds = -0.1 t e^{-t}
    CHECK(w_star(m1, 1.0, 1.0, v1(2.0))(0) ==
          doctest::Approx(-0.1 * std::exp(-1.0)).epsilon(1e-8));

    auto m2 = get_entry("S2").model;
    VectorXd eta2 = VectorXd::Ones(2);
    VectorXd w = w_star(m2, 0.0, 0.7, eta2);
    CHECK(std::abs(w(0)) < 1e-9);
    // Q branch: int_0^inf e^{-2s} 0.05 e^{-s} ds = 0.05/3
    CHECK(w(1) == doctest::Approx(0.05 / 3.0).epsilon(1e-8));
}

TEST_CASE("apply_T is constant in phi when f ignores the state") {
    auto m = get_entry("S1").model;
    auto nodes = working_grid(m, 0.0);
    GridFunction a = zero_grid_function(nodes, 1, 2.0);
    GridFunction b = a;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        b.values[i] = v1(std::cos(nodes[i]));
    GridFunction Ta = apply_T(m, a, 0.0, v1(1.0));
    GridFunction Tb = apply_T(m, b, 0.0, v1(1.0));
    for (std::size_t i = 0; i < nodes.size(); ++i)
        CHECK(std::abs(Ta.values[i](0) - Tb.values[i](0)) < 1e-12);
}

TEST_CASE("apply_T contracts at the certified rate") {
    auto m = get_entry("S3").model;
    double q_hat = verify_all(m).c23.q_hat;
    auto nodes = working_grid(m, 0.0);
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
        // smooth test functions so that interpolation between nodes does not
        // overshoot the sampled sup norm
        double ca = u(rng), cb = u(rng), wa = u(rng), wb = u(rng);
        GridFunction a = zero_grid_function(nodes, 1, 2.0);
        GridFunction b = a;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            a.values[i] = v1(ca * std::sin(wa * nodes[i]));
            b.values[i] = v1(cb * std::cos(wb * nodes[i]));
        }
        GridFunction Ta = apply_T(m, a, 0.0, v1(1.0));
        GridFunction Tb = apply_T(m, b, 0.0, v1(1.0));
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            num = std::max(num, std::abs(Ta.values[i](0) - Tb.values[i](0)));
            den = std::max(den, std::abs(a.values[i](0) - b.values[i](0)));
        }
        CHECK(num / den <= q_hat + 1e-3);
    }
}

TEST_CASE("z_star trivial and forced cases") {
    auto off = get_entry("S1", {{"f_scale", 0.0}}).model;
    PicardStats st;
    GridFunction z = z_star(off, 0.0, v1(1.0), &st);
    CHECK(st.iterations == 1);
    CHECK(z.sup_norm() == 0.0);

    auto m = get_entry("S1").model;
    z = z_star(m, 1.0, v1(2.0), &st);
    CHECK(st.iterations == 2); // constant operator: second pass confirms
    CHECK(z.eval(1.0)(0) == doctest::Approx(0.1 * std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("z_star is compatible with the linear flow") {
    auto m = get_entry("S3").model;
    double tau = 1.0;
    VectorXd xi = v1(0.8);
    auto& fp = m.fundamentals();
    GridFunction z = z_star(m, tau, xi, nullptr, {2.5});
    for (double s : {0.5, 2.0, 3.0}) {
        VectorXd xs = fp.transition(s, tau) * xi;
        GridFunction zs = z_star(m, s, xs, nullptr, {2.5});
        CHECK(std::abs(z.eval(2.5)(0) - zs.eval(2.5)(0)) < 1e-6);
    }
}

TEST_CASE("H and G closed forms on the forced scalar entry") {
    auto m = get_entry("S1").model;
    auto H = H_map(m, 1.0, v1(2.0));
    CHECK(H.value(0) == doctest::Approx(2.0 + 0.1 * std::exp(-1.0)).epsilon(1e-8));
    auto G = G_map(m, 1.0, v1(2.0));
    CHECK(G.value(0) == doctest::Approx(2.0 - 0.1 * std::exp(-1.0)).epsilon(1e-8));
}

TEST_CASE("identity system gives identity maps") {
    auto off = get_entry("S2", {{"f_scale", 0.0}}).model;
    VectorXd p(2);
    p << 1.0, -1.5;
    CHECK((H_map(off, 2.0, p).value - p).norm() < 1e-10);
    CHECK((G_map(off, 2.0, p).value - p).norm() < 1e-10);
}

TEST_CASE("zero stays fixed when f vanishes on the axis") {
    auto m = get_entry("S3").model;
    CHECK(std::abs(H_map(m, 1.7, v1(0.0)).value(0)) < 1e-10);
}

TEST_CASE("both G evaluation paths agree") {
    auto m = get_entry("S3").model;
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> ut(0.0, 3.0), ux(-2.0, 2.0);
    for (int i = 0; i < 5; ++i) {
        double tau = ut(rng);
        VectorXd eta = v1(ux(rng));
        CHECK(std::abs(G_map(m, tau, eta).value(0) -
                       G_map_anchored(m, tau, eta)(0)) < 1e-6);
    }
}

TEST_CASE("equivalence identities on the closed-form entry") {
    auto m = get_entry("S1").model;
    auto rep = check_equivalence(m, 0.0, v1(1.0), v1(1.0),
                                 {0.0, 1.0, 2.0, 3.0, 4.0, 5.0});
    CHECK(rep.passed);
    CHECK(rep.h_identity < 1e-6);
    CHECK(rep.g_identity < 1e-6);
    CHECK(rep.h_roundtrip < 1e-6);
    CHECK(rep.g_roundtrip < 1e-6);
}

TEST_CASE("roundtrip property on the nonlinear entry") {
    auto m = get_entry("S3").model;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ut(0.0, 3.0), ux(-2.0, 2.0);
    for (int i = 0; i < 5; ++i) {
        double tau = ut(rng);
        VectorXd eta = v1(ux(rng));
        VectorXd g = G_map(m, tau, eta).value;
        CHECK(std::abs(H_map(m, tau, g).value(0) - eta(0)) < 1e-5);
    }
}

TEST_CASE("a broken contraction refuses to iterate") {
    auto m = get_entry("S1", {{"f_scale", 30.0}}).model;
    CHECK_THROWS_AS(z_star(m, 0.0, v1(1.0)), Error);
}
