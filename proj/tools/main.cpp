// conjlab: batch front-end over the C API. Loads a JSON config, runs one of
// the verify / conjugate / differentiate pipelines and writes a JSON report
// plus a CSV table of every computed quantity.

#include <conjlab/conjlab.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <vector>

using nlohmann::json;

namespace {

struct RunConfig {
    std::string catalog_id;
    std::vector<std::string> param_names;
    std::vector<double> param_values;
    std::vector<double> t_grid;
    std::vector<double> tau_grid;
    std::vector<double> box_lo, box_hi;
    std::vector<std::pair<std::string, double>> tolerances;
    int n_samples = 20;
};

std::vector<double> read_grid(const json& j, const std::string& name) {
    std::vector<double> g = j.get<std::vector<double>>();
    if (g.empty()) throw std::runtime_error("grids." + name + " must be nonempty");
    return g;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    json j = json::parse(in);

    RunConfig cfg;
    cfg.catalog_id = j.at("catalog").at("id").get<std::string>();
    if (j["catalog"].contains("params"))
        for (auto& [k, v] : j["catalog"]["params"].items()) {
            cfg.param_names.push_back(k);
            cfg.param_values.push_back(v.get<double>());
        }

    cfg.t_grid = {0, 0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4, 4.5, 5};
    cfg.tau_grid = {0, 1, 2};
    if (j.contains("grids")) {
        if (j["grids"].contains("t")) cfg.t_grid = read_grid(j["grids"]["t"], "t");
        if (j["grids"].contains("tau"))
            cfg.tau_grid = read_grid(j["grids"]["tau"], "tau");
        if (j["grids"].contains("box")) {
            auto box = j["grids"]["box"];
            for (auto& side : box) {
                cfg.box_lo.push_back(side.at(0).get<double>());
                cfg.box_hi.push_back(side.at(1).get<double>());
                if (!std::isfinite(cfg.box_lo.back()) ||
                    !std::isfinite(cfg.box_hi.back()))
                    throw std::runtime_error("grids.box must be finite");
            }
        }
    }
    if (j.contains("tol"))
        for (auto& [k, v] : j["tol"].items()) {
            double tv = v.get<double>();
            if (tv <= 0) throw std::runtime_error("tol." + k + " must be > 0");
            cfg.tolerances.emplace_back(k, tv);
        }
    if (j.contains("samples")) cfg.n_samples = j["samples"].get<int>();
    return cfg;
}

[[noreturn]] void die(const std::string& msg, int code = 2) {
    std::cerr << "conjlab: " << msg << "\n";
    std::exit(code);
}

conjlab_model* make_model(const RunConfig& cfg) {
    std::vector<const char*> names;
    for (auto& n : cfg.param_names) names.push_back(n.c_str());
    conjlab_model* m = nullptr;
    int rc = conjlab_model_create(cfg.catalog_id.c_str(), names.data(),
                                  cfg.param_values.data(), names.size(), &m);
    if (rc != CONJLAB_OK) die(conjlab_last_error());
    for (auto& [k, v] : cfg.tolerances)
        if (conjlab_set_tolerance(m, k.c_str(), v) != CONJLAB_OK)
            die(conjlab_last_error());
    return m;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, int dim) : out_(path), dim_(dim) {
        if (!out_) throw std::runtime_error("cannot write " + path);
        out_ << "quantity,t,tau";
        for (int i = 0; i < dim_; ++i) out_ << ",point" << i;
        for (int i = 0; i < dim_; ++i) out_ << ",value" << i;
        out_ << ",residual,bound,status\n";
        out_.precision(17);
    }

    void row(const std::string& quantity, double t, double tau,
             const std::vector<double>& point, const std::vector<double>& value,
             double residual, double bound, const std::string& status) {
        out_ << quantity << ',' << t << ',' << tau;
        for (int i = 0; i < dim_; ++i)
            out_ << ',' << (i < (int)point.size() ? point[i] : 0.0);
        for (int i = 0; i < dim_; ++i)
            out_ << ',' << (i < (int)value.size() ? value[i] : 0.0);
        out_ << ',' << residual << ',' << bound << ',' << status << '\n';
    }

private:
    std::ofstream out_;
    int dim_;
};

std::vector<std::vector<double>> sample_box(const RunConfig& cfg, int dim,
                                            std::uint64_t seed, int n) {
    std::vector<double> lo = cfg.box_lo, hi = cfg.box_hi;
    if (lo.empty()) {
        lo.assign(dim, -2.0);
        hi.assign(dim, 2.0);
    }
    if ((int)lo.size() == 1 && dim > 1) {
        lo.assign(dim, lo[0]);
        hi.assign(dim, hi[0]);
    }
    if ((int)lo.size() != dim)
        throw std::runtime_error("grids.box dimension mismatch");
    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < n; ++i) {
        std::vector<double> p(dim);
        for (int k = 0; k < dim; ++k)
            p[k] = std::uniform_real_distribution<double>(lo[k], hi[k])(rng);
        pts.push_back(std::move(p));
    }
    return pts;
}

json verification_json(const conjlab_verification& v) {
    return {{"p_hat", v.p_hat},
            {"q_hat", v.q_hat},
            {"c1_margin_p", v.c1_margin_p},
            {"c1_margin_q", v.c1_margin_q},
            {"c1_passed", (bool)v.c1_passed},
            {"c2_passed", (bool)v.c2_passed},
            {"c3_passed", (bool)v.c3_passed},
            {"c5_passed", (bool)v.c5_passed},
            {"fatal", (bool)v.fatal}};
}

int run_verify(conjlab_model* m, const RunConfig& cfg, json& report,
               CsvWriter& csv) {
    conjlab_verification v{};
    if (conjlab_verify(m, &v) != CONJLAB_OK) die(conjlab_last_error());
    report["verification"] = verification_json(v);
    report["verification"]["t_grid"] = "101 points on [0,10]";

    csv.row("p_hat", 0, 0, {}, {v.p_hat}, 0, 1.0, v.c2_passed ? "pass" : "fail");
    csv.row("q_hat", 0, 0, {}, {v.q_hat}, 0, 1.0, v.c3_passed ? "pass" : "fail");
    csv.row("c1_margin_p", 0, 0, {}, {v.c1_margin_p}, 0, 1.0,
            v.c1_passed ? "pass" : "fail");
    csv.row("c1_margin_q", 0, 0, {}, {v.c1_margin_q}, 0, 1.0,
            v.c1_passed ? "pass" : "fail");

    json c5 = json::array();
    for (double tau : cfg.tau_grid) {
        double value = 0;
        int passed = 0;
        if (conjlab_verify_c5(m, tau, &value, &passed) != CONJLAB_OK)
            die(conjlab_last_error());
        c5.push_back({{"tau", tau}, {"value", value}, {"passed", (bool)passed}});
        csv.row("c5", 0, tau, {}, {value}, 0, 0, passed ? "pass" : "fail");
    }
    report["c5"] = c5;

    json corollary;
    for (int level = 0; level <= 1; ++level) {
        int passed = 0;
        int rc = conjlab_corollary_conditions(m, level, &passed);
        std::string key = level == 0 ? "first_order" : "second_order";
        if (rc != CONJLAB_OK)
            corollary[key] = {{"error", conjlab_last_error()}};
        else
            corollary[key] = {{"passed", (bool)passed}};
    }
    report["corollary_conditions"] = corollary;

    if (v.fatal) return 2;
    bool soft = !v.c1_passed || !v.c3_passed || !v.c5_passed;
    for (auto& item : c5)
        if (!item["passed"].get<bool>()) soft = true;
    return soft ? 1 : 0;
}

int run_conjugate(conjlab_model* m, const RunConfig& cfg, std::uint64_t seed,
                  json& report, CsvWriter& csv) {
    const int d = conjlab_model_dim(m);
    auto points = sample_box(cfg, d, seed, cfg.n_samples);

    double worst_resid = 0;
    for (double tau : cfg.tau_grid) {
        for (auto& p : points) {
            std::vector<double> h(d), g(d);
            double hres = 0, gres = 0;
            int iters = 0;
            if (conjlab_h_map(m, tau, p.data(), h.data(), &hres, &iters) !=
                CONJLAB_OK)
                die(conjlab_last_error());
            if (conjlab_g_map(m, tau, p.data(), g.data(), &gres) != CONJLAB_OK)
                die(conjlab_last_error());
            csv.row("H", tau, tau, p, h, hres, 0, "ok");
            csv.row("G", tau, tau, p, g, gres, 0, "ok");
        }
    }

    json equiv = json::array();
    for (double tau : cfg.tau_grid) {
        auto& p = points[0];
        conjlab_equivalence eq{};
        if (conjlab_check_equivalence(m, tau, p.data(), p.data(),
                                      cfg.t_grid.data(), cfg.t_grid.size(),
                                      &eq) != CONJLAB_OK)
            die(conjlab_last_error());
        equiv.push_back({{"tau", tau},
                         {"h_identity", eq.h_identity},
                         {"g_identity", eq.g_identity},
                         {"h_roundtrip", eq.h_roundtrip},
                         {"g_roundtrip", eq.g_roundtrip},
                         {"h_bound", eq.h_bound},
                         {"g_bound", eq.g_bound},
                         {"p_hat", eq.p_hat},
                         {"passed", (bool)eq.passed}});
        csv.row("h_identity", 0, tau, p, {}, eq.h_identity, 1e-5,
                eq.h_identity <= 1e-5 ? "pass" : "fail");
        csv.row("g_identity", 0, tau, p, {}, eq.g_identity, 1e-5,
                eq.g_identity <= 1e-5 ? "pass" : "fail");
        csv.row("h_roundtrip", 0, tau, p, {}, eq.h_roundtrip, 1e-5,
                eq.h_roundtrip <= 1e-5 ? "pass" : "fail");
        csv.row("g_roundtrip", 0, tau, p, {}, eq.g_roundtrip, 1e-5,
                eq.g_roundtrip <= 1e-5 ? "pass" : "fail");
        csv.row("h_bound", 0, tau, p, {}, eq.h_bound, eq.p_hat + 1e-6,
                eq.h_bound <= eq.p_hat + 1e-6 ? "pass" : "fail");
        csv.row("g_bound", 0, tau, p, {}, eq.g_bound, eq.p_hat + 1e-6,
                eq.g_bound <= eq.p_hat + 1e-6 ? "pass" : "fail");
        worst_resid = std::max({worst_resid, eq.h_identity, eq.g_identity,
                                eq.h_roundtrip, eq.g_roundtrip});
        if (!eq.passed) worst_resid = std::max(worst_resid, 1.0);
    }
    report["equivalence"] = equiv;
    report["max_residual"] = worst_resid;
    return worst_resid <= 1e-5 ? 0 : 1;
}

int run_differentiate(conjlab_model* m, const RunConfig& cfg, std::uint64_t seed,
                      json& report, CsvWriter& csv) {
    const int d = conjlab_model_dim(m);
    auto points = sample_box(cfg, d, seed, cfg.n_samples);
    const double delta = 1e-5;

    int singular = 0;
    double worst_fd = 0, worst_gronwall = 0, worst_sym = 0;
    bool have_d2 = true;

    for (double tau : cfg.tau_grid) {
        for (auto& p : points) {
            std::vector<double> dg(d * d), dh(d * d), dw(d * d);
            double cond = 0;
            if (conjlab_dg(m, tau, p.data(), dg.data()) != CONJLAB_OK)
                die(conjlab_last_error());
            int rc = conjlab_dh(m, tau, p.data(), dh.data(), &cond);
            if (rc == CONJLAB_SINGULAR_MATRIX) {
                ++singular;
                csv.row("dH", tau, tau, p, {}, 0, 1e12, "singular");
                continue;
            }
            if (rc != CONJLAB_OK) die(conjlab_last_error());
            if (conjlab_dw(m, tau, p.data(), dw.data()) != CONJLAB_OK)
                die(conjlab_last_error());

            // finite-difference cross-check of dG column by column
            double fd_err = 0, dg_norm = 0;
            for (double x : dg) dg_norm = std::max(dg_norm, std::abs(x));
            for (int k = 0; k < d; ++k) {
                std::vector<double> pp = p, pm = p, gp(d), gm(d);
                pp[k] += delta;
                pm[k] -= delta;
                if (conjlab_g_map(m, tau, pp.data(), gp.data(), nullptr) !=
                        CONJLAB_OK ||
                    conjlab_g_map(m, tau, pm.data(), gm.data(), nullptr) !=
                        CONJLAB_OK)
                    die(conjlab_last_error());
                for (int i = 0; i < d; ++i) {
                    double fd = (gp[i] - gm[i]) / (2 * delta);
                    fd_err = std::max(fd_err, std::abs(fd - dg[k * d + i]));
                }
            }
            double rel = fd_err / std::max(dg_norm, 1e-12);
            worst_fd = std::max(worst_fd, rel);
            csv.row("dG", tau, tau, p, dg, rel, 1e-4, rel <= 1e-4 ? "pass" : "fail");
            csv.row("dH", tau, tau, p, dh, 0, cond, "ok");
            csv.row("dw", tau, tau, p, dw, 0, 0, "ok");

            std::vector<double> d2w(d * d * d);
            int rc2 = conjlab_d2w(m, tau, p.data(), d2w.data());
            if (rc2 == CONJLAB_MISSING_DERIVATIVE) {
                have_d2 = false;
            } else if (rc2 != CONJLAB_OK) {
                die(conjlab_last_error());
            } else {
                double sym = 0;
                for (int k = 0; k < d; ++k)
                    for (int j = 0; j < d; ++j)
                        for (int i = 0; i < d; ++i)
                            sym = std::max(sym,
                                           std::abs(d2w[k * d * d + j * d + i] -
                                                    d2w[j * d * d + k * d + i]));
                worst_sym = std::max(worst_sym, sym);
                csv.row("d2w_symmetry", tau, tau, p, {}, sym, 1e-6,
                        sym <= 1e-6 ? "pass" : "fail");
            }
        }

        // Gronwall margin for the first variation along a sampled orbit
        for (double s : cfg.t_grid) {
            if (s < tau) continue;
            std::vector<double> z(d * d);
            double bound = 0;
            if (conjlab_first_variation(m, tau, points[0].data(), s, z.data()) !=
                    CONJLAB_OK ||
                conjlab_gronwall_bound(m, s, tau, &bound) != CONJLAB_OK)
                die(conjlab_last_error());
            double znorm = 0;
            for (double x : z) znorm = std::max(znorm, std::abs(x));
            double margin = znorm / bound;
            worst_gronwall = std::max(worst_gronwall, margin);
            csv.row("first_variation", s, tau, points[0], z, margin, bound,
                    margin <= 1.0 + 1e-9 ? "pass" : "fail");
        }
    }

    report["max_dG_fd_relative_error"] = worst_fd;
    report["max_gronwall_margin"] = worst_gronwall;
    report["singular_points"] = singular;
    if (have_d2) report["max_d2w_symmetry_defect"] = worst_sym;
    return (singular > 0 || worst_fd > 1e-4) ? 1 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonautonomous topological equivalence laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    std::uint64_t seed = 42;
    bool force = false;

    for (auto* name : {"verify", "conjugate", "differentiate"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_flag("--force", force, "run even if verification fails");
        sub->add_option("--seed", seed, "seed for sampled points");
        sub->add_option("--out", out_dir, "output directory");
    }

    CLI11_PARSE(app, argc, argv);
    std::string cmd = app.get_subcommands().front()->get_name();

    try {
        RunConfig cfg = load_config(config_path);
        std::filesystem::create_directories(out_dir);
        conjlab_model* m = make_model(cfg);

        json report;
        report["command"] = cmd;
        report["catalog_id"] = cfg.catalog_id;
        report["seed"] = seed;
        for (size_t i = 0; i < cfg.param_names.size(); ++i)
            report["params"][cfg.param_names[i]] = cfg.param_values[i];
        report["grids"] = {{"t", cfg.t_grid}, {"tau", cfg.tau_grid}};
        for (auto& [k, v] : cfg.tolerances) report["tol"][k] = v;

        CsvWriter csv(out_dir + "/" + cmd + ".csv", conjlab_model_dim(m));
        int rc = 0;

        if (cmd == "verify") {
            rc = run_verify(m, cfg, report, csv);
        } else {
            conjlab_verification v{};
            if (conjlab_verify(m, &v) != CONJLAB_OK) die(conjlab_last_error());
            report["verification"] = verification_json(v);
            if (v.fatal) die("q_hat >= 1: refusing to construct the conjugacy");
            bool ok = v.c1_passed && v.c2_passed && v.c3_passed;
            if (!ok && !force)
                die("hypothesis verification failed; rerun with --force", 1);
            rc = cmd == "conjugate" ? run_conjugate(m, cfg, seed, report, csv)
                                    : run_differentiate(m, cfg, seed, report, csv);
        }

        report["exit_code"] = rc;
        std::ofstream jf(out_dir + "/" + cmd + ".json");
        jf << report.dump(2) << "\n";
        std::cout << report.dump(2) << "\n";
        conjlab_model_destroy(m);
        return rc;
    } catch (const std::exception& e) {
        die(e.what());
    }
}
