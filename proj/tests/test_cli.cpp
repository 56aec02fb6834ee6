#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hardy/cli.hpp"

using namespace hardy;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

nlohmann::json base_config(const std::string& command, const std::string& outdir) {
    nlohmann::json j;
    j["scenario"] = {{"kind", "ball_equator"}, {"beta", 0.25}};
    j["weights"] = {{"p", "1"}, {"q", "1"}, {"eta", "delta^2"}};
    j["run"] = {{"command", command}, {"output_dir", outdir}, {"samples", 400},
                {"grid_n", 10},       {"grid_gamma", 2.0},    {"beta", 0.02},
                {"eps_list", {0.5}},  {"lambda", 1.0}};
    return j;
}

}  // namespace

TEST_CASE("config parsing validates structure") {
    CHECK_THROWS_AS(ExperimentConfig::from_json(nlohmann::json::object()), ConfigError);

    nlohmann::json j = base_config("solve", "x");
    j["scenario"]["kind"] = "wedge";
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError);

    j = base_config("solve", "x");
    j["weights"]["q"] = "1 + (";
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError);

    j = base_config("solve", "x");
    j["run"]["tol"] = -1.0;
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError);

    j = base_config("solve", "x");
    j["run"]["grid_pair"] = {64, 32};
    CHECK_THROWS_AS(ExperimentConfig::from_json(j), ConfigError);

    CHECK_NOTHROW(ExperimentConfig::from_json(base_config("solve", "x")));
}

TEST_CASE("lambda grid syntax") {
    auto g = parse_lambda_grid("-10:10:21");
    REQUIRE(g.size() == 21);
    CHECK(g.front() == -10.0);
    CHECK(g.back() == 10.0);
    CHECK(g[10] == 0.0);
    CHECK_THROWS_AS(parse_lambda_grid("1:2"), ConfigError);
    CHECK_THROWS_AS(parse_lambda_grid("5:1:3"), ConfigError);
    CHECK_THROWS_AS(parse_lambda_grid("a:b:c"), ConfigError);
}

TEST_CASE("unknown command maps to invalid-config") {
    auto cfg = ExperimentConfig::from_json(base_config("frobnicate", "/tmp/hardy_cli_t0"));
    CHECK(cli::run(cfg) == cli::kInvalidConfig);
}

TEST_CASE("hypothesis violation maps to exit 4") {
    nlohmann::json j = base_config("solve", "/tmp/hardy_cli_t1");
    j["weights"]["q"] = "1.5";
    auto cfg = ExperimentConfig::from_json(j);
    CHECK(cli::run(cfg) == cli::kViolation);
}

TEST_CASE("ik artifact schema") {
    nlohmann::json j = base_config("ik", "/tmp/hardy_cli_t2");
    j["weights"]["q"] = "0.75";
    auto cfg = ExperimentConfig::from_json(j);
    REQUIRE(cli::run(cfg) == cli::kOk);
    auto art = nlohmann::json::parse(slurp("/tmp/hardy_cli_t2/attainment.json"));
    CHECK(art["schema"] == 1);
    CHECK(art["verdict"] == "finite");
    CHECK(std::abs(art["value"].get<double>() - 4 * M_PI) < 1e-8);
}

TEST_CASE("divergent ik artifact spells it out") {
    nlohmann::json j = base_config("ik", "/tmp/hardy_cli_t3");
    j["weights"]["q"] = "1 - sin(psi)^2";
    auto cfg = ExperimentConfig::from_json(j);
    REQUIRE(cli::run(cfg) == cli::kOk);
    auto art = nlohmann::json::parse(slurp("/tmp/hardy_cli_t3/attainment.json"));
    CHECK(art["value"] == "divergent");
}

TEST_CASE("report produces byte-identical artifacts on repeated runs") {
    nlohmann::json j = base_config("report", "/tmp/hardy_cli_rep1");
    j["run"]["lambdas"] = "-4:4:5";
    j["run"]["samples"] = 300;
    j["run"]["grid_n"] = 10;
    auto cfg1 = ExperimentConfig::from_json(j);
    REQUIRE(cli::run(cfg1) == cli::kOk);

    j["run"]["output_dir"] = "/tmp/hardy_cli_rep2";
    auto cfg2 = ExperimentConfig::from_json(j);
    REQUIRE(cli::run(cfg2) == cli::kOk);

    int compared = 0;
    for (const auto& entry : fs::directory_iterator("/tmp/hardy_cli_rep1")) {
        const auto name = entry.path().filename();
        INFO("artifact " << name);
        CHECK(slurp(entry.path()) == slurp(fs::path("/tmp/hardy_cli_rep2") / name));
        ++compared;
    }
    CHECK(compared >= 6);
}

TEST_CASE("solve artifact records grid and convergence") {
    nlohmann::json j = base_config("solve", "/tmp/hardy_cli_t4");
    j["run"]["lambda"] = 0.0;
    auto cfg = ExperimentConfig::from_json(j);
    REQUIRE(cli::run(cfg) == cli::kOk);
    auto art = nlohmann::json::parse(slurp("/tmp/hardy_cli_t4/mu_result.json"));
    CHECK(art["converged"] == true);
    CHECK(art["mu"].get<double>() > 0.9);
    CHECK(art["grid"].get<std::string>().find("ball_equator") == 0);
}

#ifdef HARDY_BIN
TEST_CASE("binary exit codes") {
    const std::string bin = HARDY_BIN;
    fs::create_directories("/tmp/hardy_cli_bin");
    {
        std::ofstream out("/tmp/hardy_cli_bin/bad.json");
        out << "{ not json";
    }
    CHECK(WEXITSTATUS(std::system(
              (bin + " ik --config /tmp/hardy_cli_bin/bad.json 2>/dev/null").c_str())) ==
          cli::kInvalidConfig);
    {
        std::ofstream out("/tmp/hardy_cli_bin/ik.json");
        out << base_config("ik", "/tmp/hardy_cli_bin/out").dump();
    }
    CHECK(WEXITSTATUS(std::system(
              (bin + " ik --config /tmp/hardy_cli_bin/ik.json 2>/dev/null").c_str())) == cli::kOk);
    CHECK(WEXITSTATUS(std::system((bin + " bogus 2>/dev/null").c_str())) == cli::kInvalidConfig);
}
#endif
