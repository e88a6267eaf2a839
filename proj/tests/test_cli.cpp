#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;
using nlohmann::json;

static std::string g_cli;

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-cli-binary>\n");
        return 1;
    }
    g_cli = argv[argc - 1];
    doctest::Context ctx(argc - 1, argv);
    return ctx.run();
}

namespace {

fs::path scratch_dir() {
    static fs::path base = [] {
        fs::path p = fs::temp_directory_path() / "conjlab_cli_test";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    static int n = 0;
    fs::path d = base / ("case" + std::to_string(n++));
    fs::create_directories(d);
    return d;
}

std::string write_config(const fs::path& dir, const json& j) {
    fs::path p = dir / "config.json";
    std::ofstream(p) << j.dump(2);
    return p.string();
}

int run_cli(const std::string& args) {
    std::string cmd = g_cli + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json small_config(const std::string& id) {
    return {{"catalog", {{"id", id}}},
            {"grids", {{"t", {0.0, 1.0, 2.0}}, {"tau", {0.0, 1.0}}}},
            {"samples", 3}};
}

} // namespace

TEST_CASE("missing arguments are a usage error") {
    CHECK(run_cli("") != 0);
    CHECK(run_cli("verify") != 0);
}

TEST_CASE("verify on the default forced scalar entry passes") {
    auto dir = scratch_dir();
    auto cfg = write_config(dir, {{"catalog", {{"id", "S1"}}}});
    CHECK(run_cli("verify --config " + cfg + " --out " + dir.string()) == 0);

    json rep = json::parse(slurp(dir / "verify.json"));
    CHECK(rep["command"] == "verify");
    CHECK(rep["exit_code"] == 0);
    CHECK(rep["verification"]["fatal"] == false);
    CHECK(std::abs(rep["verification"]["q_hat"].get<double>() - 0.1 / std::exp(1.0)) <
          1e-6);

    std::string csv = slurp(dir / "verify.csv");
    CHECK(csv.rfind("quantity,t,tau,point0,value0,residual,bound,status", 0) == 0);
    CHECK(csv.find("q_hat") != std::string::npos);
    CHECK(csv.find("c5") != std::string::npos);
}

TEST_CASE("a failed pointwise bound is a soft failure") {
    auto dir = scratch_dir();
    auto cfg = write_config(
        dir, {{"catalog", {{"id", "S1"}, {"params", {{"K_scale", 0.5}}}}}});
    CHECK(run_cli("verify --config " + cfg + " --out " + dir.string()) == 1);
    json rep = json::parse(slurp(dir / "verify.json"));
    CHECK(rep["verification"]["c1_passed"] == false);
}

TEST_CASE("a broken contraction is fatal") {
    auto dir = scratch_dir();
    auto cfg = write_config(
        dir, {{"catalog", {{"id", "S1"}, {"params", {{"f_scale", 30.0}}}}}});
    CHECK(run_cli("verify --config " + cfg + " --out " + dir.string()) == 2);
    CHECK(run_cli("conjugate --config " + cfg + " --out " + dir.string()) == 2);
    CHECK(run_cli("conjugate --force --config " + cfg + " --out " + dir.string()) ==
          2);
}

TEST_CASE("conjugate requires --force when hypotheses fail softly") {
    auto dir = scratch_dir();
    json j = small_config("S1");
    j["catalog"]["params"] = {{"K_scale", 0.5}};
    auto cfg = write_config(dir, j);
    CHECK(run_cli("conjugate --config " + cfg + " --out " + dir.string()) == 1);
    CHECK(run_cli("conjugate --force --config " + cfg + " --out " + dir.string()) ==
          0);
}

TEST_CASE("conjugate writes residual-checked maps") {
    auto dir = scratch_dir();
    auto cfg = write_config(dir, small_config("S3"));
    CHECK(run_cli("conjugate --config " + cfg + " --out " + dir.string()) == 0);

    json rep = json::parse(slurp(dir / "conjugate.json"));
    CHECK(rep["max_residual"].get<double>() <= 1e-5);
    CHECK(rep["equivalence"].size() == 2);
    for (auto& e : rep["equivalence"]) CHECK(e["passed"] == true);

    std::string csv = slurp(dir / "conjugate.csv");
    CHECK(csv.find("\nH,") != std::string::npos);
    CHECK(csv.find("\nG,") != std::string::npos);
    CHECK(csv.find("h_roundtrip") != std::string::npos);
}

TEST_CASE("the sampled points are reproducible for a fixed seed") {
    auto d1 = scratch_dir(), d2 = scratch_dir(), d3 = scratch_dir();
    auto cfg = write_config(d1, small_config("S3"));
    CHECK(run_cli("conjugate --config " + cfg + " --seed 7 --out " + d1.string()) ==
          0);
    CHECK(run_cli("conjugate --config " + cfg + " --seed 7 --out " + d2.string()) ==
          0);
    CHECK(run_cli("conjugate --config " + cfg + " --seed 8 --out " + d3.string()) ==
          0);
    CHECK(slurp(d1 / "conjugate.csv") == slurp(d2 / "conjugate.csv"));
    CHECK(slurp(d1 / "conjugate.csv") != slurp(d3 / "conjugate.csv"));
}

TEST_CASE("differentiate cross-checks the derivative maps") {
    auto dir = scratch_dir();
    json j = small_config("S3");
    j["grids"]["tau"] = {0.0};
    j["grids"]["box"] = {{-1.5, 1.5}};
    auto cfg = write_config(dir, j);
    CHECK(run_cli("differentiate --config " + cfg + " --out " + dir.string()) == 0);

    json rep = json::parse(slurp(dir / "differentiate.json"));
    CHECK(rep["max_dG_fd_relative_error"].get<double>() <= 1e-4);
    CHECK(rep["max_gronwall_margin"].get<double>() <= 1.0 + 1e-9);
    CHECK(rep["singular_points"] == 0);
    CHECK(rep["max_d2w_symmetry_defect"].get<double>() <= 1e-6);

    std::string csv = slurp(dir / "differentiate.csv");
    CHECK(csv.find("\ndG,") != std::string::npos);
    CHECK(csv.find("first_variation") != std::string::npos);
}

TEST_CASE("bad configs exit fatally with a message") {
    auto dir = scratch_dir();
    CHECK(run_cli("verify --config " + (dir / "nope.json").string()) == 2);

    auto bad_id = write_config(dir, {{"catalog", {{"id", "S9"}}}});
    CHECK(run_cli("verify --config " + bad_id + " --out " + dir.string()) == 2);

    json j = {{"catalog", {{"id", "S1"}}}, {"tol", {{"quad", -1.0}}}};
    auto bad_tol = write_config(scratch_dir(), j);
    CHECK(run_cli("verify --config " + bad_tol) == 2);

    json c = {{"catalog", {{"id", "S4"}, {"params", {{"nu", 0.9}}}}}};
    auto bad_param = write_config(scratch_dir(), c);
    CHECK(run_cli("verify --config " + bad_param) == 2);
}

TEST_CASE("tolerance overrides flow through the config") {
    auto dir = scratch_dir();
    json j = {{"catalog", {{"id", "S1"}}}, {"tol", {{"quad", 1e-8}, {"fp", 1e-8}}}};
    auto cfg = write_config(dir, j);
    CHECK(run_cli("verify --config " + cfg + " --out " + dir.string()) == 0);
    json rep = json::parse(slurp(dir / "verify.json"));
    CHECK(rep["tol"]["quad"].get<double>() == 1e-8);
}
