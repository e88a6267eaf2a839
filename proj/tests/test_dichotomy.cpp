#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "catalog.hpp"
#include "dichotomy.hpp"
#include "errors.hpp"

#include <cmath>
#include <random>

using namespace conjlab;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("projector at the anchor time is P0") {
    auto m = get_entry("S2").model;
    CHECK(opnorm(projector_at(m, 0.0) - m.dich.P0) < 1e-12);
}

TEST_CASE("diagonal flow keeps a diagonal projector constant") {
    auto m = get_entry("S2").model;
    for (double t : {0.5, 1.0, 3.0, 5.0}) {
        MatrixXd P = projector_at(m, t);
        CHECK(opnorm(P - m.dich.P0) < 1e-9);
        CHECK(opnorm(P * P - P) < 1e-8);
    }
}

TEST_CASE("projector invariance along the flow") {
    auto m = get_entry("S2").model;
    auto& fp = m.fundamentals();
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (int i = 0; i < 10; ++i) {
        double t = u(rng), s = u(rng);
        MatrixXd X = fp.transition(t, s);
        CHECK(opnorm(projector_at(m, t) * X - X * projector_at(m, s)) < 1e-8);
    }
}

TEST_CASE("Green's operator closed forms") {
    auto m1 = get_entry("S1").model;
    CHECK(greens_operator(m1, 2.0, 1.0)(0, 0) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
    CHECK(opnorm(greens_operator(m1, 1.5, 1.5) - projector_at(m1, 1.5)) < 1e-10);

    auto m2 = get_entry("S2").model;
    MatrixXd G = greens_operator(m2, 0.0, 1.0);
    MatrixXd expect = MatrixXd::Zero(2, 2);
    expect(1, 1) = -std::exp(-2.0);
    CHECK(opnorm(G - expect) < 1e-9);
}

TEST_CASE("Green's operator solves the linear equation in t") {
    auto m = get_entry("S2").model;
    double s = 1.0, dt = 1e-5;
    for (double t : {0.3, 2.5}) {
        MatrixXd dG = (greens_operator(m, t + dt, s) -
                       greens_operator(m, t - dt, s)) /
                      (2.0 * dt);
        MatrixXd AG = m.sys.coeff(t) * greens_operator(m, t, s);
        CHECK(opnorm(dG - AG) / std::max(opnorm(AG), 1e-12) < 1e-4);
    }
}

TEST_CASE("c1 margins on the scalar entry") {
    auto m = get_entry("S1").model;
    auto rep = verify_c1(m, default_c1_grid(5.0));
    CHECK(rep.passed);
    CHECK(rep.margin_p <= 1.0 + 1e-9);
}

TEST_CASE("a halved K envelope fails c1 with margin 2") {
    auto m = get_entry("S1", {{"K_scale", 0.5}}).model;
    auto rep = verify_c1(m, default_c1_grid(5.0));
    CHECK_FALSE(rep.passed);
    CHECK(rep.margin_p == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("c2/c3 integrals against the closed form") {
    auto m = get_entry("S1").model;
    auto rep = verify_c2_c3(m, default_t_grid());
    // sup_t int_0^t e^{-(t-s)} 0.1 e^{-s} ds = max_t 0.1 t e^{-t} = 0.1/e
    CHECK(rep.p_hat == doctest::Approx(0.1 / std::exp(1.0)).epsilon(1e-6));
    CHECK(rep.q_hat == doctest::Approx(0.1 / std::exp(1.0)).epsilon(1e-6));
    CHECK(rep.c3_passed);
    CHECK(rep.p_hat <= 0.2); // 2 K sup(u) / lambda
}

TEST_CASE("c5 with a zero Lipschitz envelope is zero") {
    auto m = get_entry("S2").model;
    auto rep = verify_c5(m, {0.0, 1.0});
    CHECK(rep.all_passed);
    CHECK(rep.values[0] == 0.0);
}

TEST_CASE("c5 certifies a decaying integrand") {
    auto m = get_entry("S1").model;
    auto rep = verify_c5(m, {0.0});
    CHECK(rep.all_passed);
    // int_0^inf 0.1 e^{-s} e^{0.1(1-e^{-s})} ds = e^{0.1} - 1
    CHECK(rep.values[0] == doctest::Approx(std::exp(0.1) - 1.0).epsilon(1e-8));
}

TEST_CASE("c5 reports growth when the envelope cannot keep up") {
    auto m = get_entry("S4").model;
    auto rep = verify_c5(m, {0.0});
    CHECK_FALSE(rep.all_passed);
    CHECK(rep.diagnostics[0].find("decay") != std::string::npos);
}

TEST_CASE("first-order inequality set") {
    auto m = get_entry("S1").model; // K=1, nu=0.1, lambda=1, M=0.5
    auto rep = corollary_conditions(m, CorollaryLevel::c1);
    CHECK(rep.all_passed);

    auto bad = get_entry("S1", {{"M", 1.0}}).model; // M + nu >= lambda
    CHECK_FALSE(corollary_conditions(bad, CorollaryLevel::c1).all_passed);
}

TEST_CASE("nonuniform first-order inequality set") {
    auto m = get_entry("S4").model;
    auto rep = corollary_conditions(m, CorollaryLevel::c1);
    CHECK(rep.all_passed); // M < lambda and nu < lambda - M
}

TEST_CASE("equal-exponent reduction appears in the report") {
    auto m = get_entry("S3").model; // eps0 = eps1 = eps2
    auto rep = corollary_conditions(m, CorollaryLevel::c2_smooth);
    bool has_reduced = false;
    for (auto& c : rep.checks)
        if (c.inequality == "2*M < lambda") has_reduced = true;
    CHECK(has_reduced);
}

TEST_CASE("missing corollary parameter is a configuration error") {
    auto m = get_entry("S2").model; // no eps1/eps2 in its params
    CHECK_THROWS_AS(corollary_conditions(m, CorollaryLevel::c2_smooth), Error);
}

TEST_CASE("verify_all flags q_hat >= 1 as fatal") {
    auto m = get_entry("S1", {{"f_scale", 30.0}}).model;
    CHECK(verify_all(m).fatal);
}
