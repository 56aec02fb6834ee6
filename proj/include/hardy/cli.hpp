#pragma once

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hardy/concentration.hpp"
#include "hardy/config.hpp"
#include "hardy/constructions.hpp"
#include "hardy/distance_expansions.hpp"
#include "hardy/io.hpp"
#include "hardy/problem.hpp"
#include "hardy/solver.hpp"

namespace hardy::cli {

/// Exit-code taxonomy (total):
///   0 success, 2 invalid config or usage, 3 solver nonconvergence,
///   4 verification violation (weight hypotheses or sign sweeps), 1 internal.
enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kInvalidConfig = 2,
    kNonConvergence = 3,
    kViolation = 4,
};

using Json = nlohmann::ordered_json;

namespace detail {

inline Json mu_result_json(const MuResult& r) {
    Json j;
    j["lambda"] = r.lambda;
    j["mu"] = r.mu;
    j["residual"] = r.residual;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["grid"] = r.grid_signature;
    if (!r.message.empty()) j["message"] = r.message;
    return j;
}

inline void write_json(const std::filesystem::path& p, Json j) {
    j["schema"] = 1;
    atomic_write(p, j.dump(2) + "\n");
}

inline double certified_beta_default(const Scenario& s) {
    // recorded certification results for the built-in scenarios (see
    // certify_beta); generic fallback is beta/2
    switch (s.kind) {
        case ScenarioKind::FlatSlab: return std::min(0.05, s.beta);
        case ScenarioKind::BallEquator: return std::min(0.05, s.beta);
        case ScenarioKind::ParametricCurveOnSphere: return std::min(0.025, s.beta / 2);
    }
    return s.beta / 2;
}

}  // namespace detail

inline int cmd_solve(const ExperimentConfig& cfg) {
    require_valid(cfg.weights, cfg.scenario, 2000);
    auto p = build_problem(cfg.scenario, cfg.weights, cfg.grid_n, cfg.grid_gamma);
    MuResult r = min_rayleigh(p.A, p.B_q, &p.B_eta, cfg.lambda, cfg.tol, cfg.max_iter);
    r.grid_signature = p.signature();
    Json j = detail::mu_result_json(r);
    j["plateau"] = p.plateau;
    detail::write_json(std::filesystem::path(cfg.output_dir) / "mu_result.json", j);
    return r.converged ? kOk : kNonConvergence;
}

inline int cmd_curve(const ExperimentConfig& cfg) {
    require_valid(cfg.weights, cfg.scenario, 2000);
    if (cfg.lambdas.empty()) throw ConfigError("curve: run.lambdas (lo:hi:count) is required");
    auto lambdas = parse_lambda_grid(cfg.lambdas);
    auto p = build_problem(cfg.scenario, cfg.weights, cfg.grid_n, cfg.grid_gamma);
    auto curve = mu_curve(p.A, p.B_q, &p.B_eta, lambdas, cfg.tol, cfg.max_iter, p.signature());

    CsvWriter csv("lambda,mu,residual,iterations");
    bool all_converged = true;
    for (const auto& r : curve.points) {
        csv.row(r.lambda, r.mu, r.residual, r.iterations);
        all_converged = all_converged && r.converged;
    }
    const auto dir = std::filesystem::path(cfg.output_dir);
    atomic_write(dir / "mu_curve.csv", csv.str());
    atomic_write(dir / "mu_curve.gp", gnuplot_mu_curve("mu_curve.csv", p.plateau));
    Json j;
    j["plateau"] = p.plateau;
    j["nonincreasing"] = curve.nonincreasing;
    j["concave"] = curve.concave;
    j["worst_monotonicity_gap"] = curve.worst_monotonicity_gap;
    j["worst_concavity_gap"] = curve.worst_concavity_gap;
    j["grid"] = p.signature();
    detail::write_json(dir / "mu_curve.json", j);
    return all_converged ? kOk : kNonConvergence;
}

inline int cmd_threshold(const ExperimentConfig& cfg) {
    require_valid(cfg.weights, cfg.scenario, 2000);
    auto coarse = build_problem(cfg.scenario, cfg.weights, cfg.grid_pair[0], cfg.grid_gamma);
    auto fine = build_problem(cfg.scenario, cfg.weights, cfg.grid_pair[1], cfg.grid_gamma);
    ThresholdProblem tp{&coarse.A, &coarse.B_q,     &coarse.B_eta,     &fine.A,          &fine.B_q,
                        &fine.B_eta, fine.plateau, coarse.signature(), fine.signature()};
    ThresholdResult th = find_threshold(tp, cfg.width_tol, cfg.tol, cfg.max_iter);
    Json j;
    j["plateau"] = th.plateau;
    j["tol_mu"] = th.tol_mu;
    j["bracket"] = {th.lambda_lo, th.lambda_hi};
    j["certified"] = th.certified;
    j["grid_coarse"] = th.grid_coarse;
    j["grid_fine"] = th.grid_fine;
    j["evidence_lo"] = detail::mu_result_json(th.evidence_lo);
    j["evidence_hi"] = detail::mu_result_json(th.evidence_hi);
    if (!th.message.empty()) j["message"] = th.message;
    detail::write_json(std::filesystem::path(cfg.output_dir) / "threshold.json", j);
    return th.certified ? kOk : kNonConvergence;
}

inline int cmd_verify_geometry(const ExperimentConfig& cfg) {
    const Scenario& s = cfg.scenario;
    std::vector<double> ladder;
    for (double r : {0.2, 0.1, 0.05, 0.025})
        if (r < s.beta) ladder.push_back(r);
    if (ladder.size() < 2)
        throw ConfigError("verify-geometry: scenario beta too small for the rung ladder");
    const int per_rung = std::max(10, cfg.samples / int(ladder.size()) / 25);
    auto rep = check_distance_expansions(s, ladder, per_rung, cfg.seed);

    CsvWriter csv("delta_tilde,r1,r2,r3,r4");
    double max_r2 = 0;
    for (const auto& sm : rep.samples) {
        if (sm.excluded) continue;
        csv.row(sm.delta_tilde, sm.r[0], sm.r[1], sm.r[2], sm.r[3]);
        max_r2 = std::max(max_r2, sm.r[1]);
    }
    const auto dir = std::filesystem::path(cfg.output_dir);
    atomic_write(dir / "expansion_report.csv", csv.str());

    // metric residual spot checks on the chart
    FermiChart chart = s.kind == ScenarioKind::FlatSlab ? make_chart(s, 0.0, {0.0})
                                                        : make_chart(s, 0.0);
    double g11 = 0, g1b = 0;
    Halton seq(3, cfg.seed);
    for (int i = 0; i < 50; ++i) {
        Vec u = seq.point(i);
        Vec y(s.N);
        for (std::size_t a = 0; a < s.N && a < 3; ++a)
            y[a] = 0.3 * chart.radius * (2 * u[a] - 1);
        auto mr = metric_components(chart, y, 1e-5);
        g11 = std::max(g11, mr.res_g11);
        g1b = std::max(g1b, mr.res_g1b);
    }

    Json j;
    j["ladder"] = rep.rungs;
    j["fit_r1"] = rep.fitted[0];
    j["fit_r2"] = rep.fitted[1];
    j["fit_r3"] = rep.fitted[2];
    j["fit_r4"] = rep.fitted[3];
    j["fit_ratio_r1"] = rep.fit_ratio[0];
    j["fit_ratio_r3"] = rep.fit_ratio[2];
    j["fit_ratio_r4"] = rep.fit_ratio[3];
    j["max_r2"] = max_r2;
    j["metric_res_g11"] = g11;
    j["metric_res_g1b"] = g1b;
    const bool ok = max_r2 <= 1e-6 && rep.fit_ratio[0] <= 3.0 && rep.fit_ratio[2] <= 3.0 &&
                    rep.fit_ratio[3] <= 3.0 && g11 <= 1e-8 && g1b <= 1e-8;
    j["pass"] = ok;
    detail::write_json(dir / "geometry_report.json", j);
    if (!ok) std::cerr << "verify-geometry: violation, see " << (dir / "geometry_report.json")
                       << "\n";
    return ok ? kOk : kViolation;
}

inline int cmd_verify_constructions(const ExperimentConfig& cfg) {
    const Scenario& s = cfg.scenario;
    require_valid(cfg.weights, cfg.scenario, 2000);
    const double beta =
        cfg.collar_beta > 0 ? cfg.collar_beta : detail::certified_beta_default(s);
    const double lambda = cfg.lambda;
    const auto dir = std::filesystem::path(cfg.output_dir);

    // exact flat residual for the scenario's (N, k)
    Vec yt(s.N - s.k);
    yt[0] = 0.06;
    if (s.N - s.k >= 2) yt[1] = -0.08;
    const double flat_res = flat_ground_state_residual(s.N, s.k, yt);

    Json j;
    j["flat_ground_state_residual"] = flat_res;
    j["beta"] = beta;
    j["lambda"] = lambda;
    int violations = 0;

    auto margins_csv = [&](const SignReport& rep, const std::string& name) {
        CsvWriter csv("delta_tilde,margin");
        for (auto [dt, m] : rep.margin_curve) csv.row(dt, m);
        atomic_write(dir / (name + "_margins.csv"), csv.str());
        atomic_write(dir / (name + "_margins.gp"), gnuplot_margins(name + "_margins.csv"));
    };

    Json subs = Json::array();
    for (double eps : cfg.eps_list) {
        SignReport rep = check_subsolution(s, cfg.weights, lambda, eps, beta, cfg.samples, cfg.seed);
        Json je;
        je["eps"] = eps;
        je["samples"] = rep.samples;
        je["violations"] = rep.violations;
        je["excluded"] = rep.excluded;
        je["max_value"] = rep.max_value;
        subs.push_back(je);
        margins_csv(rep, "subsolution_eps" + format_double(eps));
        violations += rep.violations;
    }
    j["subsolution"] = subs;

    SignReport sup = check_supersolution(s, cfg.weights, lambda, beta, cfg.samples, cfg.seed);
    Json js;
    js["samples"] = sup.samples;
    js["violations"] = sup.violations;
    js["positivity_violations"] = sup.positivity_violations;
    js["excluded"] = sup.excluded;
    js["max_value"] = sup.max_value;
    j["supersolution"] = js;
    margins_csv(sup, "supersolution");
    violations += sup.violations + sup.positivity_violations;

    // Laplacian-expansion envelope for W_{0,M0,q}
    {
        OperatorSpec op = make_operator(lambda, cfg.weights, s);
        CollarConstants cc = collar_constants(s, &cfg.weights);
        GroundStateSpec spec(0.0, cc.M0, op.q, s);
        std::vector<double> rungs;
        for (double r : {0.8, 0.4, 0.2, 0.1}) rungs.push_back(beta * r);
        auto env = envelope_check(s, spec, op.q, rungs, 50, cfg.seed);
        Json jenv;
        jenv["rungs"] = env.rungs;
        jenv["fitted_K"] = env.fitted_K;
        jenv["K_ratio"] = env.K_ratio;
        j["envelope"] = jenv;
        j["collar_constants"] = {{"h_max", cc.h_max}, {"M0", cc.M0}, {"M1", cc.M1},
                                 {"M2", cc.M2}};
    }

    j["violations_total"] = violations;
    j["pass"] = violations == 0 && std::abs(flat_res) == 0.0;
    detail::write_json(dir / "sign_report.json", j);
    if (violations > 0)
        std::cerr << "verify-constructions: violations recorded in "
                  << (dir / "sign_report.json") << "\n";
    return violations == 0 ? kOk : kViolation;
}

inline int cmd_local_hardy(const ExperimentConfig& cfg) {
    require_valid(cfg.weights, cfg.scenario, 2000);
    const double beta =
        cfg.collar_beta > 0 ? cfg.collar_beta : detail::certified_beta_default(cfg.scenario);
    auto cp = build_collar_problem(cfg.scenario, cfg.weights, beta, cfg.grid_n, cfg.grid_gamma);
    MuResult c = local_hardy_check(cp.A, cp.B_q, cp.B_log, cp.plateau, cfg.tol, cfg.max_iter);
    Json j;
    j["beta"] = beta;
    j["grid"] = cp.grid.signature();
    j["plateau"] = cp.plateau;
    j["c"] = c.mu;
    j["residual"] = c.residual;
    j["iterations"] = c.iterations;
    j["converged"] = c.converged;
    detail::write_json(std::filesystem::path(cfg.output_dir) / "local_hardy.json", j);
    if (!c.converged) return kNonConvergence;
    return c.mu > 0 ? kOk : kViolation;
}

inline int cmd_ik(const ExperimentConfig& cfg) {
    // the boundary integral is well-defined for any q/p <= 1 on Sigma_k
    // (constant-gap anchors deliberately sit below the max q/p = 1 case);
    // attainment_integral itself rejects q/p > 1
    AttainmentResult r = attainment_integral(cfg.weights, cfg.scenario, cfg.ik_tol);
    Json j;
    if (r.verdict == AttainmentVerdict::Finite)
        j["value"] = r.value;
    else
        j["value"] = to_string(r.verdict);
    j["verdict"] = to_string(r.verdict);
    j["exponent"] = r.local_exponent;
    j["error"] = r.quadrature_error;
    if (!r.diagnostics.empty()) j["diagnostics"] = r.diagnostics;
    detail::write_json(std::filesystem::path(cfg.output_dir) / "attainment.json", j);
    return kOk;
}

inline int cmd_report(const ExperimentConfig& cfg) {
    // bundle: geometry + constructions + ik + a small curve + local hardy
    int worst = kOk;
    auto step = [&](int code) { worst = std::max(worst, code); };
    ExperimentConfig c = cfg;
    step(cmd_verify_geometry(c));
    step(cmd_verify_constructions(c));
    step(cmd_ik(c));
    if (c.lambdas.empty()) c.lambdas = "-10:10:11";
    step(cmd_curve(c));
    step(cmd_local_hardy(c));
    Json j;
    j["outputs"] = {"geometry_report.json", "sign_report.json", "attainment.json",
                    "mu_curve.csv",         "mu_curve.json",    "local_hardy.json"};
    j["worst_exit_code"] = worst;
    detail::write_json(std::filesystem::path(cfg.output_dir) / "manifest.json", j);
    return worst;
}

/// Dispatch on the command name; every failure path maps to one code.
inline int run(const ExperimentConfig& cfg) {
    try {
        const std::string& c = cfg.command;
        if (c == "solve") return cmd_solve(cfg);
        if (c == "curve") return cmd_curve(cfg);
        if (c == "threshold") return cmd_threshold(cfg);
        if (c == "verify-geometry") return cmd_verify_geometry(cfg);
        if (c == "verify-constructions") return cmd_verify_constructions(cfg);
        if (c == "local-hardy") return cmd_local_hardy(cfg);
        if (c == "ik") return cmd_ik(cfg);
        if (c == "report") return cmd_report(cfg);
        std::cerr << "unknown command: '" << c << "'\n";
        return kInvalidConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kInvalidConfig;
    } catch (const WeightHypothesisError& e) {
        std::cerr << e.what() << "\n";
        return kViolation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInternal;
    }
}

}  // namespace hardy::cli
