#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "asympheat/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string write_config(const std::string& name, const json& cfg) {
    fs::create_directories("cli_cfg");
    std::string path = "cli_cfg/" + name;
    std::ofstream out(path);
    out << cfg.dump(2);
    return path;
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return json::parse(in);
}

int run(std::vector<std::string> args) { return asympheat::cli::run(args); }

} // namespace

TEST_CASE("usage errors exit with the configuration status") {
    CHECK(run({}) == 2);
    CHECK(run({"transmogrify"}) == 2);
    CHECK(run({"evolve"}) == 2); // --config is required
    CHECK(run({"evolve", "--config", "does_not_exist.json"}) == 2);
    CHECK(run({"verify", "--suite", "nonsense"}) == 2);
    CHECK(run({"--help"}) == 0);
}

TEST_CASE("malformed configurations name the offending field") {
    json cfg;
    cfg["grid"] = {{"d", 2}, {"n", 32}, {"half_width", 6.0}};
    cfg["chart"] = {{"n", 1}}; // N missing
    cfg["remainder"] = {{"kind", "zero"}};
    cfg["times"] = {0.0, 0.5};
    std::string path = write_config("bad_chart.json", cfg);
    CHECK(run({"evolve", "--config", path, "--out", "cli_out/bad_chart"}) == 2);

    cfg["chart"] = {{"N", -3}};
    path = write_config("neg_chart.json", cfg);
    CHECK(run({"evolve", "--config", path, "--out", "cli_out/neg_chart"}) == 2);

    cfg["chart"] = {{"N", 2}};
    cfg["grid"]["d"] = 7;
    path = write_config("bad_dim.json", cfg);
    CHECK(run({"evolve", "--config", path, "--out", "cli_out/bad_dim"}) == 2);
}

TEST_CASE("the trivial verification suite passes and writes its report") {
    REQUIRE(run({"verify", "--suite", "trivial", "--out", "cli_out/verify_trivial"}) == 0);
    json rep = read_json("cli_out/verify_trivial/report.json");
    CHECK(rep.at("pass").get<bool>());
    CHECK(rep.at("subcommand").get<std::string>() == "verify");
    CHECK(!rep.at("checks").empty());
    json echo = read_json("cli_out/verify_trivial/config_echo.json");
    CHECK(echo.at("_invocation").at("suite").get<std::string>() == "trivial");
}

TEST_CASE("evolve produces monitor curves and snapshots") {
    json cfg;
    cfg["grid"] = {{"d", 2}, {"n", 32}, {"half_width", 6.0}};
    cfg["chart"] = {{"kind", "explicit"},
                    {"n", 1},
                    {"N", 2},
                    {"L_max", 2},
                    {"coeffs", {{"1", {0.4, 0.0, 0.1, 0.0, 0.0}}}}};
    cfg["remainder"] = {{"kind", "gaussian"}, {"amplitude", 0.5}, {"sigma", 1.0}};
    cfg["times"] = {0.0, 0.2, 0.5};
    std::string path = write_config("evolve.json", cfg);
    REQUIRE(run({"evolve", "--config", path, "--out", "cli_out/evolve"}) == 0);
    CHECK(fs::exists("cli_out/evolve/curves.csv"));
    CHECK(fs::exists("cli_out/evolve/snapshot_final.json"));
    json rep = read_json("cli_out/evolve/report.json");
    CHECK(rep.at("pass").get<bool>());

    std::ifstream csv("cli_out/evolve/curves.csv");
    std::string line;
    int rows = 0;
    while (std::getline(csv, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 4); // header + one row per time
}

TEST_CASE("the equilibrium driver meets its configured checks") {
    json cfg;
    cfg["grid"] = {{"d", 3}, {"n", 48}, {"half_width", 8.0}};
    cfg["problem"] = {
        {"phi", {{"kind", "gaussian"}, {"amplitude", 1.0}, {"sigma", 0.8}, {"normalize", true}}},
        {"psi", {{"kind", "zero"}}}};
    cfg["chart"] = {{"N", 2}, {"L_max", 4}};
    cfg["cutoff"] = {{"r0", 2.0}, {"r1", 4.0}};
    cfg["checks"] = {{"residual_max", 1e-8},
                     {"monopole_expect", 1.0 / (4.0 * M_PI)},
                     {"monopole_rel_tol", 0.05},
                     {"purity_min", 0.99}};
    std::string path = write_config("equilibrium.json", cfg);
    REQUIRE(run({"equilibrium", "--config", path, "--out", "cli_out/equilibrium"}) == 0);
    CHECK(fs::exists("cli_out/equilibrium/u_star.json"));
    CHECK(fs::exists("cli_out/equilibrium/chart.json"));
    json rep = read_json("cli_out/equilibrium/report.json");
    CHECK(rep.at("pass").get<bool>());
    CHECK(rep.at("newton_iters").get<int>() <= 3);
}

TEST_CASE("the flow driver writes monitors and enforces frozen coefficients") {
    json cfg;
    cfg["grid"] = {{"d", 2}, {"n", 32}, {"half_width", 6.0}};
    cfg["problem"] = {{"phi", {{"kind", "zero"}}}, {"psi", {{"kind", "zero"}}}};
    cfg["initial"] = {{"kind", "fields"},
                      {"remainder", {{"kind", "gaussian"}, {"amplitude", 0.4}, {"sigma", 1.0}}}};
    cfg["T"] = 0.1;
    cfg["dt"] = 0.02;
    cfg["checks"] = {{"monotone_lp", true}};
    std::string path = write_config("flow.json", cfg);
    REQUIRE(run({"flow", "--config", path, "--out", "cli_out/flow"}) == 0);
    CHECK(fs::exists("cli_out/flow/monitors.csv"));
    json rep = read_json("cli_out/flow/report.json");
    CHECK(rep.at("pass").get<bool>());
    CHECK(rep.at("steps").get<int>() == 5);
}

TEST_CASE("the resolvent driver validates kernels and samples the sector") {
    json cfg;
    cfg["d"] = 3;
    cfg["kernel_points"] = 20;
    cfg["n_sector"] = 10;
    cfg["identity"] = {
        {"grid", {{"d", 2}, {"n", 32}, {"half_width", 5.0}}},
        {"field", {{"kind", "gaussian"}, {"sigma", 1.0}}},
        {"lambda", {1.5, 2.0}}};
    std::string path = write_config("resolvent.json", cfg);
    REQUIRE(run({"resolvent", "--config", path, "--out", "cli_out/resolvent"}) == 0);
    CHECK(fs::exists("cli_out/resolvent/resolvent.csv"));
    json rep = read_json("cli_out/resolvent/report.json");
    CHECK(rep.at("pass").get<bool>());
}

TEST_CASE("the sweep driver aggregates genericity trials") {
    json cfg;
    cfg["grid"] = {{"d", 3}, {"n", 32}, {"half_width", 10.0}};
    cfg["problem"] = {
        {"phi", {{"kind", "gaussian"}, {"amplitude", 1.0}, {"sigma", 0.8}, {"normalize", true}}},
        {"psi", {{"kind", "zero"}}}};
    cfg["chart"] = {{"N", 3}, {"L_max", 4}};
    cfg["eps"] = 0.1;
    cfg["trials"] = 2;
    cfg["k_check"] = 3;
    cfg["checks"] = {{"min_fraction", 0.9}, {"expect_base_degenerate", true}};
    std::string path = write_config("sweep.json", cfg);
    REQUIRE(run({"sweep", "--config", path, "--out", "cli_out/sweep", "--seed", "7"}) == 0);
    CHECK(fs::exists("cli_out/sweep/sweep.csv"));
    json rep = read_json("cli_out/sweep/report.json");
    CHECK(rep.at("pass").get<bool>());
    CHECK(rep.at("fraction_all_nonzero").get<double>() == 1.0);
}

TEST_CASE("reports are deterministic for a fixed seed") {
    REQUIRE(run({"verify", "--suite", "trivial", "--out", "cli_out/det_a", "--seed", "5"}) == 0);
    REQUIRE(run({"verify", "--suite", "trivial", "--out", "cli_out/det_b", "--seed", "5"}) == 0);
    std::ifstream a("cli_out/det_a/report.json"), b("cli_out/det_b/report.json");
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
}
