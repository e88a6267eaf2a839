#include "catalog.hpp"

#include "errors.hpp"

#include <cmath>

namespace conjlab {

namespace {

using Params = std::map<std::string, double>;

Params resolve(const Params& defaults, const Params& overrides,
               const std::string& id) {
    Params p = defaults;
    for (const auto& [k, v] : overrides) {
        if (!p.count(k))
            fail(ErrorCode::config,
                 "unknown parameter '" + k + "' for catalog entry " + id);
        p[k] = v;
    }
    return p;
}

void require(bool ok, const std::string& inequality) {
    if (!ok)
        fail(ErrorCode::param_constraint,
             "parameter constraint violated: requires " + inequality);
}

Envelope exp_envelope(double coef, double rate) {
    return {[coef, rate](double s) { return coef * std::exp(-rate * s); },
            coef, rate};
}

Envelope zero_envelope() {
    return {[](double) { return 0.0; }, 0.0, 1.0};
}

void scalar_stable_linear(Model& m, double lambda) {
    m.sys.dim = 1;
    m.sys.coeff = [lambda](double) {
        return Eigen::MatrixXd::Constant(1, 1, -lambda);
    };
    m.sys.uniform_bound = std::max(lambda, 1.0 / lambda);
    m.dich.P0 = Eigen::MatrixXd::Identity(1, 1);
}

CatalogEntry make_s1(const Params& overrides) {
    Params p = resolve({{"kappa", 0.1},
                        {"eps0", 1.0},
                        {"f_scale", 1.0},
                        {"K_scale", 1.0},
                        {"M", 0.5}},
                       overrides, "scalar-exp-forced");
    require(p["kappa"] >= 0.0, "kappa >= 0");
    require(p["eps0"] > 0.0, "eps0 > 0");
    require(p["K_scale"] > 0.0, "K_scale > 0");

    CatalogEntry e;
    e.id = "scalar-exp-forced";
    e.params = p;
    Model& m = e.model;
    scalar_stable_linear(m, 1.0);

    double k = p["kappa"] * p["f_scale"];
    double e0 = p["eps0"];
    m.nl.f = [k, e0](double s, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Constant(1, k * std::exp(-e0 * s));
    };
    m.nl.df = [](double, const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Zero(1, 1);
    };
    m.nl.d2f = [](double, const Eigen::VectorXd&) {
        return std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Zero(1, 1)};
    };
    m.nl.u_env = exp_envelope(k, e0);
    // the conservative choice v = u keeps the contraction certificate active
    // even though f here does not depend on the state at all
    m.nl.v_env = m.nl.u_env;
    m.nl.V_env = zero_envelope();

    double Ks = p["K_scale"];
    m.dich.K = [Ks](double) { return Ks; };
    m.dich.h = [](double t) { return std::exp(-t); };
    m.dich.Kh = exp_envelope(Ks, 1.0);
    m.dich.params = {{"K", Ks}, {"lambda", 1.0}, {"M", p["M"]}, {"nu", k}};

    if (k == 0.1 && e0 == 1.0) {
        e.expected = {
            {"H(1,2)", 2.0367879441, "xi + 0.1 t e^{-t} at t=1"},
            {"G(1,2)", 1.9632120559, "eta - 0.1 t e^{-t} at t=1"},
            {"q_hat", 0.1 / std::exp(1.0), "max_t 0.1 t e^{-t}"},
        };
    }
    return e;
}

CatalogEntry make_s2(const Params& overrides) {
    Params p = resolve(
        {{"lambda", 2.0}, {"a", 0.05}, {"f_scale", 1.0}, {"K_scale", 1.0}, {"M", 0.5}},
        overrides, "saddle-2d-forced");
    require(p["lambda"] > 0.0, "lambda > 0");
    require(p["K_scale"] > 0.0, "K_scale > 0");

    CatalogEntry e;
    e.id = "saddle-2d-forced";
    e.params = p;
    Model& m = e.model;
    double lam = p["lambda"];
    m.sys.dim = 2;
    m.sys.coeff = [lam](double) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
        A(0, 0) = -lam;
        A(1, 1) = lam;
        return A;
    };
    m.sys.uniform_bound = std::max(lam, 1.0 / lam);
    m.dich.P0 = Eigen::MatrixXd::Zero(2, 2);
    m.dich.P0(0, 0) = 1.0;

    double a = p["a"] * p["f_scale"];
    m.nl.f = [a](double s, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Constant(2, a * std::exp(-s));
    };
    m.nl.df = [](double, const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Zero(2, 2);
    };
    m.nl.d2f = [](double, const Eigen::VectorXd&) {
        return std::vector<Eigen::MatrixXd>(2, Eigen::MatrixXd::Zero(2, 2));
    };
    m.nl.u_env = exp_envelope(std::abs(a) * std::sqrt(2.0), 1.0);
    m.nl.v_env = zero_envelope();
    m.nl.V_env = zero_envelope();

    double Ks = p["K_scale"];
    m.dich.K = [Ks](double) { return Ks; };
    m.dich.h = [lam](double t) { return std::exp(-lam * t); };
    m.dich.Kh = exp_envelope(Ks, lam);
    m.dich.params = {
        {"K", Ks}, {"lambda", lam}, {"M", p["M"]}, {"nu", 0.0}};

    if (lam == 2.0 && a == 0.05)
        e.expected = {{"w_star(0)[1]", 0.05 / 3.0,
                       "int_0^inf e^{-2s} 0.05 e^{-s} ds on the unstable axis"}};
    return e;
}

CatalogEntry make_s3(const Params& overrides) {
    Params p = resolve({{"nu", 0.1},
                        {"eps1", 1.0},
                        {"f_scale", 1.0},
                        {"K_scale", 1.0},
                        {"M", 0.5}},
                       overrides, "scalar-exp-sin");
    require(p["nu"] >= 0.0, "nu >= 0");
    require(p["eps1"] > 0.0, "eps1 > 0");
    require(p["K_scale"] > 0.0, "K_scale > 0");

    CatalogEntry e;
    e.id = "scalar-exp-sin";
    e.params = p;
    Model& m = e.model;
    scalar_stable_linear(m, 1.0);

    double nu = p["nu"] * p["f_scale"];
    double e1 = p["eps1"];
    m.nl.f = [nu, e1](double s, const Eigen::VectorXd& y) {
        return Eigen::VectorXd::Constant(1,
                                         nu * std::exp(-e1 * s) * std::sin(y(0)));
    };
    m.nl.df = [nu, e1](double s, const Eigen::VectorXd& y) {
        return Eigen::MatrixXd::Constant(1, 1,
                                         nu * std::exp(-e1 * s) * std::cos(y(0)));
    };
    m.nl.d2f = [nu, e1](double s, const Eigen::VectorXd& y) {
        return std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Constant(
            1, 1, -nu * std::exp(-e1 * s) * std::sin(y(0)))};
    };
    m.nl.u_env = exp_envelope(nu, e1);
    m.nl.v_env = exp_envelope(nu, e1);
    m.nl.V_env = exp_envelope(nu, e1);

    double Ks = p["K_scale"];
    m.dich.K = [Ks](double) { return Ks; };
    m.dich.h = [](double t) { return std::exp(-t); };
    m.dich.Kh = exp_envelope(Ks, 1.0);
    m.dich.params = {{"K", Ks},     {"lambda", 1.0}, {"M", p["M"]},
                     {"nu", nu},    {"eps0", e1},    {"eps1", e1},
                     {"eps2", e1},  {"zeta", nu}};

    if (nu == 0.1 && e1 == 1.0)
        e.expected = {{"q_hat", 0.1 / std::exp(1.0),
                       "max_t int_0^t e^{-(t-s)} 0.1 e^{-s} ds = max 0.1 t e^{-t}"}};
    return e;
}

CatalogEntry make_s4(const Params& overrides) {
    Params p = resolve({{"C", 1.0},
                        {"lambda", 1.0},
                        {"eps0", 0.1},
                        {"eps1", 0.1},
                        {"eps2", 0.1},
                        {"M", 0.5},
                        {"nu", 0.2},
                        {"zeta", 0.2},
                        {"f_scale", 1.0}},
                       overrides, "nonuniform-exp");
    double lam = p["lambda"], M = p["M"], nu = p["nu"], e1 = p["eps1"];
    require(p["C"] >= 1.0, "C >= 1");
    require(lam > 0.0, "lambda > 0");
    require(M > 0.0 && M < lam, "0 < M < lambda");
    require(nu > 0.0 && nu < lam - M, "0 < nu < lambda - M");
    require(p["eps0"] > e1 - lam, "eps0 > eps1 - lambda");

    CatalogEntry e;
    e.id = "nonuniform-exp";
    e.params = p;
    Model& m = e.model;
    scalar_stable_linear(m, lam);

    double nuf = nu * p["f_scale"];
    m.nl.f = [nuf, e1](double s, const Eigen::VectorXd& y) {
        return Eigen::VectorXd::Constant(1,
                                         nuf * std::exp(-e1 * s) * std::sin(y(0)));
    };
    m.nl.df = [nuf, e1](double s, const Eigen::VectorXd& y) {
        return Eigen::MatrixXd::Constant(1, 1,
                                         nuf * std::exp(-e1 * s) * std::cos(y(0)));
    };
    m.nl.d2f = [nuf, e1](double s, const Eigen::VectorXd& y) {
        return std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Constant(
            1, 1, -nuf * std::exp(-e1 * s) * std::sin(y(0)))};
    };
    m.nl.u_env = exp_envelope(nuf, p["eps0"]);
    m.nl.v_env = exp_envelope(nuf, e1);
    m.nl.V_env = exp_envelope(nuf, e1);

    double C = p["C"];
    m.dich.K = [C, e1](double s) { return C * std::exp(e1 * s); };
    m.dich.h = [lam](double t) { return std::exp(-lam * t); };
    m.dich.Kh = exp_envelope(C, lam - e1);
    m.dich.params = p;
    m.dich.params.erase("f_scale");
    return e;
}

} // namespace

CatalogEntry get_entry(const std::string& id, const Params& overrides) {
    if (id == "S1" || id == "scalar-exp-forced") return make_s1(overrides);
    if (id == "S2" || id == "saddle-2d-forced") return make_s2(overrides);
    if (id == "S3" || id == "scalar-exp-sin") return make_s3(overrides);
    if (id == "S4" || id == "nonuniform-exp") return make_s4(overrides);
    fail(ErrorCode::unknown_entry, "unknown catalog entry '" + id + "'");
}

std::vector<std::string> catalog_ids() {
    return {"scalar-exp-forced", "saddle-2d-forced", "scalar-exp-sin",
            "nonuniform-exp"};
}

} // namespace conjlab
