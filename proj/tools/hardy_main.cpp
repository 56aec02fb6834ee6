#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "hardy/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"hardy: weighted Hardy quotient laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    std::string lambdas;
    double lambda = 0.0;
    bool lambda_set = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--output", output_dir, "output directory (overrides config)");
        return sub;
    };

    auto* solve = add_common(app.add_subcommand("solve", "one eigenvalue at fixed lambda"));
    solve->add_option("--lambda", lambda, "lambda value")->each([&](const std::string&) {
        lambda_set = true;
    });
    auto* curve = add_common(app.add_subcommand("curve", "mu(lambda) curve"));
    curve->add_option("--lambdas", lambdas, "lambda grid lo:hi:count");
    add_common(app.add_subcommand("threshold", "bracket the plateau threshold"));
    add_common(app.add_subcommand("verify-geometry", "distance expansion and metric checks"));
    add_common(
        app.add_subcommand("verify-constructions", "sub/supersolution sweeps and envelopes"));
    add_common(app.add_subcommand("local-hardy", "discrete local improved Hardy constant"));
    add_common(app.add_subcommand("ik", "attainment integral over Sigma_k"));
    add_common(app.add_subcommand("report", "full verification bundle"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : hardy::cli::kInvalidConfig;
    }

    hardy::ExperimentConfig cfg{hardy::Scenario{}, hardy::WeightTriple{}, ""};
    try {
        cfg = hardy::ExperimentConfig::from_file(config_path);
    } catch (const hardy::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return hardy::cli::kInvalidConfig;
    }

    cfg.command = app.get_subcommands().front()->get_name();
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (!lambdas.empty()) cfg.lambdas = lambdas;
    if (lambda_set) cfg.lambda = lambda;
    return hardy::cli::run(cfg);
}
