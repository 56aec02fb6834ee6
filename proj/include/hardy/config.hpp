#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hardy/geometry.hpp"
#include "hardy/weights.hpp"

namespace hardy {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Parsed and validated experiment description: a scenario, a weight
/// triple over (x1..xN, d, delta, delta_tilde, psi), and run parameters.
struct ExperimentConfig {
    Scenario scenario;
    WeightTriple weights;
    std::string command;

    double lambda = 0.0;
    std::string lambdas;  // lo:hi:count
    std::size_t grid_n = 32;
    double grid_gamma = 2.0;
    std::vector<std::size_t> grid_pair{32, 64};
    double collar_beta = 0.0;  // 0: use the certified default
    double width_tol = 0.5;
    double tol = 1e-9;
    int max_iter = 400;
    double ik_tol = 1e-8;
    int samples = 10000;
    std::uint64_t seed = 0;
    std::vector<double> eps_list{0.25, 0.5, 0.75};
    std::string output_dir = "out";

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig from_file(const std::string& path);
};

namespace detail {

template <class T>
T require_field(const nlohmann::json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& j) {
    const std::string kind = detail::require_field<std::string>(j, "kind", "scenario");
    const double beta = j.value("beta", 0.1);
    if (kind == "flat_slab") {
        const auto N = j.value("N", 3);
        const auto k = j.value("k", 1);
        if (N < 3 || k < 1 || k > N - 2)
            throw ConfigError("scenario: flat_slab requires N >= 3 and 1 <= k <= N-2");
        return Scenario::flat_slab(std::size_t(N), std::size_t(k), beta);
    }
    if (kind == "ball_equator") return Scenario::ball_equator(beta);
    if (kind == "parametric_curve_on_sphere") {
        if (!j.contains("curve") || !j.at("curve").is_array() || j.at("curve").size() != 3)
            throw ConfigError("scenario: parametric curve needs \"curve\": [cx, cy, cz]");
        try {
            CurveOnSphere c(Expression::parse(j.at("curve")[0].get<std::string>()),
                            Expression::parse(j.at("curve")[1].get<std::string>()),
                            Expression::parse(j.at("curve")[2].get<std::string>()));
            return Scenario::parametric_curve(std::move(c), beta);
        } catch (const ParseError& e) {
            throw ConfigError(std::string("scenario.curve: ") + e.what());
        }
    }
    throw ConfigError("scenario.kind: unknown kind '" + kind + "'");
}

inline ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    if (!j.contains("scenario")) throw ConfigError("config: missing 'scenario' block");
    if (!j.contains("weights")) throw ConfigError("config: missing 'weights' block");

    Scenario s = scenario_from_json(j.at("scenario"));
    const auto& jw = j.at("weights");
    WeightTriple w;
    try {
        w = WeightTriple::parse(detail::require_field<std::string>(jw, "p", "weights"),
                                detail::require_field<std::string>(jw, "q", "weights"),
                                detail::require_field<std::string>(jw, "eta", "weights"), s);
    } catch (const ParseError& e) {
        throw ConfigError(std::string("weights: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("weights: ") + e.what());
    }

    ExperimentConfig cfg{s, std::move(w), ""};
    const nlohmann::json run = j.value("run", nlohmann::json::object());
    cfg.command = run.value("command", "");
    cfg.lambda = run.value("lambda", 0.0);
    cfg.lambdas = run.value("lambdas", "");
    cfg.grid_n = run.value("grid_n", std::size_t(32));
    cfg.grid_gamma = run.value("grid_gamma", 2.0);
    if (run.contains("grid_pair")) {
        cfg.grid_pair = run.at("grid_pair").get<std::vector<std::size_t>>();
        if (cfg.grid_pair.size() != 2 || cfg.grid_pair[0] >= cfg.grid_pair[1])
            throw ConfigError("run.grid_pair: expected [coarse, fine] with coarse < fine");
    }
    cfg.collar_beta = run.value("beta", 0.0);
    cfg.width_tol = run.value("width_tol", 0.5);
    cfg.tol = run.value("tol", 1e-9);
    cfg.max_iter = run.value("max_iter", 400);
    cfg.ik_tol = run.value("ik_tol", 1e-8);
    cfg.samples = run.value("samples", 10000);
    cfg.seed = run.value("seed", std::uint64_t(0));
    if (run.contains("eps_list")) cfg.eps_list = run.at("eps_list").get<std::vector<double>>();
    cfg.output_dir = run.value("output_dir", std::string("out"));

    if (!(cfg.tol > 0) || !(cfg.ik_tol > 0) || !(cfg.width_tol > 0))
        throw ConfigError("run: tolerances must be positive");
    if (cfg.collar_beta < 0) throw ConfigError("run.beta: must be nonnegative");
    for (double e : cfg.eps_list)
        if (e < 0 || e >= 1) throw ConfigError("run.eps_list: entries must lie in [0,1)");
    return cfg;
}

inline ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return from_json(j);
}

/// Parses the lo:hi:count lambda grid syntax.
inline std::vector<double> parse_lambda_grid(const std::string& spec) {
    const auto c1 = spec.find(':');
    const auto c2 = spec.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw ConfigError("lambda grid: expected lo:hi:count, got '" + spec + "'");
    double lo, hi;
    long count;
    try {
        lo = std::stod(spec.substr(0, c1));
        hi = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
        count = std::stol(spec.substr(c2 + 1));
    } catch (const std::exception&) {
        throw ConfigError("lambda grid: malformed numbers in '" + spec + "'");
    }
    if (count < 2 || hi <= lo) throw ConfigError("lambda grid: need hi > lo and count >= 2");
    std::vector<double> out;
    out.resize(std::size_t(count));
    for (long i = 0; i < count; ++i)
        out[std::size_t(i)] = lo + (hi - lo) * double(i) / double(count - 1);
    return out;
}

}  // namespace hardy
