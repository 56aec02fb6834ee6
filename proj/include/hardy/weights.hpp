#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hardy/core.hpp"
#include "hardy/expression.hpp"
#include "hardy/geometry.hpp"
#include "hardy/quadrature.hpp"

namespace hardy {

/// Weight evaluator: an expression over the scenario variables
/// x1..xN, d, delta, delta_tilde, psi (angle/parameter along Sigma_k).
/// Only the geometric quantities the expression actually mentions are
/// computed, so plain coordinate weights stay cheap in assembly loops.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(Expression e, const Scenario& s) : expr_(std::move(e)), scenario_(s) {
        std::vector<std::string> slots;
        for (std::size_t i = 0; i < s.N; ++i) slots.push_back("x" + std::to_string(i + 1));
        slots.insert(slots.end(), {"d", "delta", "delta_tilde", "psi"});
        for (const auto& v : expr_.variables()) {
            bool known = v == "d" || v == "delta" || v == "delta_tilde" || v == "psi";
            for (const auto& sl : slots) known = known || sl == v;
            if (!known)
                throw std::invalid_argument("weight expression uses unknown variable '" + v + "'");
        }
        compiled_ = std::make_shared<CompiledExpression>(expr_, slots);
        const auto& used = compiled_->used_slots();
        auto uses = [&](std::size_t i) { return i < used.size() && used[i]; };
        need_d_ = uses(s.N);
        need_delta_ = uses(s.N + 1);
        need_dt_ = uses(s.N + 2);
        need_psi_ = uses(s.N + 3);
    }

    static ScalarField parse(const std::string& src, const Scenario& s) {
        return ScalarField(Expression::parse(src), s);
    }

    double operator()(const Vec& x) const {
        std::array<double, kMaxDim + 4> slots{};
        for (std::size_t i = 0; i < x.size(); ++i) slots[i] = x[i];
        const std::size_t N = scenario_.N;
        if (need_d_) slots[N] = scenario_.dist_boundary(x);
        if (need_delta_) slots[N + 1] = scenario_.dist_sigma(x);
        if (need_dt_) slots[N + 2] = scenario_.delta_tilde(x);
        if (need_psi_) slots[N + 3] = angle_param(x);
        return compiled_->eval({slots.data(), N + 4});
    }

    /// Evaluation on Sigma_k itself given the parameter and ambient point;
    /// all distances vanish there by definition.
    double on_sigma(const Vec& sigma, double psi) const {
        std::array<double, kMaxDim + 4> slots{};
        for (std::size_t i = 0; i < sigma.size(); ++i) slots[i] = sigma[i];
        const std::size_t N = scenario_.N;
        slots[N + 3] = psi;
        return compiled_->eval({slots.data(), N + 4});
    }

    const Expression& expression() const { return expr_; }
    const Scenario& scenario() const { return scenario_; }

private:
    double angle_param(const Vec& x) const {
        switch (scenario_.kind) {
            case ScenarioKind::BallEquator: return std::atan2(x[1], x[0]);
            case ScenarioKind::ParametricCurveOnSphere: {
                Vec p = x;
                const double r = norm(x);
                if (r > 0) p *= 1.0 / r;
                return scenario_.curve.argmin([&](const Vec& c) { return -dot(p, c); });
            }
            case ScenarioKind::FlatSlab:
                throw std::domain_error("variable 'psi' is undefined for flat_slab");
        }
        return 0;
    }

    Expression expr_;
    Scenario scenario_;
    std::shared_ptr<const CompiledExpression> compiled_;
    bool need_d_ = false, need_delta_ = false, need_dt_ = false, need_psi_ = false;
};

/// The (p, q, eta) triple with its closed-form descriptors.
struct WeightTriple {
    ScalarField p, q, eta;

    static WeightTriple parse(const std::string& p_src, const std::string& q_src,
                              const std::string& eta_src, const Scenario& s) {
        return WeightTriple{ScalarField::parse(p_src, s), ScalarField::parse(q_src, s),
                            ScalarField::parse(eta_src, s)};
    }
};

struct ValidationIssue {
    std::string condition;
    Vec point;
    double value = 0;
};

struct ValidationReport {
    bool valid = true;
    double min_p = std::numeric_limits<double>::infinity();
    double min_q = std::numeric_limits<double>::infinity();
    double max_eta_on_sigma = 0;       // should vanish
    double eta_over_delta_C = 0;       // fitted Lipschitz-type constant
    double max_q_over_p_on_sigma = 0;  // should equal 1
    std::vector<ValidationIssue> violations;  // worst offenders per condition
};

class WeightHypothesisError : public std::runtime_error {
public:
    explicit WeightHypothesisError(const std::string& condition)
        : std::runtime_error("weight hypothesis violated: " + condition), condition(condition) {}
    std::string condition;
};

/// Uniform parameterization of Sigma_k used by validation and the
/// attainment integral: a parameter cube mapped to (sigma point, measure
/// weight). k = 1 for the built-in curved scenarios, k = dim(patch) for
/// the slab.
struct SigmaChart {
    std::size_t dim = 1;
    double lo = 0, hi = 1;  // per-axis parameter range

    static SigmaChart of(const Scenario& s) {
        SigmaChart c;
        switch (s.kind) {
            case ScenarioKind::FlatSlab:
                c.dim = s.k;
                c.lo = -s.patch_half_width;
                c.hi = s.patch_half_width;
                break;
            case ScenarioKind::BallEquator:
            case ScenarioKind::ParametricCurveOnSphere:
                c.dim = 1;
                c.lo = 0;
                c.hi = 2 * M_PI;
                break;
        }
        return c;
    }
};

inline Vec sigma_point(const Scenario& s, std::span<const double> params) {
    switch (s.kind) {
        case ScenarioKind::FlatSlab: {
            Vec p(s.N);
            for (std::size_t a = 0; a < s.k; ++a) p[s.N - s.k + a] = params[a];
            return p;
        }
        case ScenarioKind::BallEquator:
            return Vec{std::cos(params[0]), std::sin(params[0]), 0.0};
        case ScenarioKind::ParametricCurveOnSphere:
            return s.curve.point(params[0]);
    }
    return Vec(s.N);
}

/// Surface measure density d(sigma)/d(params).
inline double sigma_measure(const Scenario& s, std::span<const double> params) {
    switch (s.kind) {
        case ScenarioKind::FlatSlab:
        case ScenarioKind::BallEquator:
            return 1.0;  // unit-speed parameterizations
        case ScenarioKind::ParametricCurveOnSphere:
            return s.curve.speed(params[0]);
    }
    return 1.0;
}

/// Checks the standing hypotheses on a dense quasi-random sample:
/// positivity of p and q, eta = 0 on Sigma_k, eta <= C delta on the collar
/// (C fitted and reported), and max_{Sigma_k} q/p = 1 within 1e-8.
inline ValidationReport validate_weights(const WeightTriple& w, const Scenario& s, int n_samples) {
    ValidationReport rep;
    Halton seq(s.N, 0);
    auto record = [&](const std::string& cond, const Vec& x, double v) {
        rep.valid = false;
        // keep only the worst offender per condition
        for (auto& is : rep.violations)
            if (is.condition == cond) {
                if (std::abs(v) > std::abs(is.value)) {
                    is.point = x;
                    is.value = v;
                }
                return;
            }
        rep.violations.push_back({cond, x, v});
    };

    // interior sample of Omega
    int found = 0;
    for (std::uint64_t i = 0; found < n_samples && i < std::uint64_t(50) * n_samples; ++i) {
        Vec u = seq.point(i);
        Vec x(s.N);
        if (s.kind == ScenarioKind::FlatSlab) {
            x[0] = u[0];
            for (std::size_t j = 1; j < s.N; ++j) x[j] = 2 * u[j] - 1;
        } else {
            for (std::size_t j = 0; j < 3; ++j) x[j] = 2 * u[j] - 1;
            if (norm(x) >= 1) continue;
        }
        ++found;
        const double pv = w.p(x), qv = w.q(x), ev = w.eta(x);
        rep.min_p = std::min(rep.min_p, pv);
        rep.min_q = std::min(rep.min_q, qv);
        if (!(pv > 0)) record("p > 0 in closure(Omega)", x, pv);
        if (!(qv > 0)) record("q > 0 in closure(Omega)", x, qv);
        const double delta = s.dist_sigma(x);
        if (delta > 1e-8 && !(ev > 0)) record("eta > 0 off Sigma_k", x, ev);
        if (delta > 1e-12 && delta < s.beta)
            rep.eta_over_delta_C = std::max(rep.eta_over_delta_C, std::abs(ev) / delta);
    }

    // Sigma_k sample: eta vanishes, q/p attains max 1
    SigmaChart chart = SigmaChart::of(s);
    const int n_sigma = std::max(64, n_samples / 4);
    Halton sseq(chart.dim, 0);
    for (int i = 0; i < n_sigma; ++i) {
        Vec u = sseq.point(i);
        std::array<double, kMaxDim> prm{};
        for (std::size_t j = 0; j < chart.dim; ++j)
            prm[j] = chart.lo + (chart.hi - chart.lo) * u[j];
        std::span<const double> params{prm.data(), chart.dim};
        Vec sig = sigma_point(s, params);
        const double psi = params[0];
        const double ev = w.eta.on_sigma(sig, psi);
        rep.max_eta_on_sigma = std::max(rep.max_eta_on_sigma, std::abs(ev));
        if (std::abs(ev) > 1e-10) record("eta = 0 on Sigma_k", sig, ev);
        const double ratio = w.q.on_sigma(sig, psi) / w.p.on_sigma(sig, psi);
        rep.max_q_over_p_on_sigma = std::max(rep.max_q_over_p_on_sigma, ratio);
    }
    // refine the maximum of q/p with a fine deterministic grid pass
    if (chart.dim == 1) {
        const int fine = 4096;
        for (int i = 0; i < fine; ++i) {
            const double t = chart.lo + (chart.hi - chart.lo) * (i + 0.5) / fine;
            std::array<double, 1> prm{t};
            Vec sig = sigma_point(s, prm);
            const double ratio = w.q.on_sigma(sig, t) / w.p.on_sigma(sig, t);
            rep.max_q_over_p_on_sigma = std::max(rep.max_q_over_p_on_sigma, ratio);
        }
    }
    if (std::abs(rep.max_q_over_p_on_sigma - 1.0) > 1e-8)
        record("max_{Sigma_k} q/p = 1", Vec(s.N), rep.max_q_over_p_on_sigma);

    return rep;
}

inline void require_valid(const WeightTriple& w, const Scenario& s, int n_samples = 2000) {
    ValidationReport rep = validate_weights(w, s, n_samples);
    if (!rep.valid) throw WeightHypothesisError(rep.violations.front().condition);
}

enum class AttainmentVerdict { Finite, Divergent, Indeterminate };

inline std::string to_string(AttainmentVerdict v) {
    switch (v) {
        case AttainmentVerdict::Finite: return "finite";
        case AttainmentVerdict::Divergent: return "divergent";
        case AttainmentVerdict::Indeterminate: return "indeterminate";
    }
    return "?";
}

/// Result of the boundary integral I_k = int_{Sigma_k} dsigma / sqrt(1 - q/p).
/// A finite value certifies attainment at the critical threshold; divergence
/// certifies non-attainment.
struct AttainmentResult {
    AttainmentVerdict verdict = AttainmentVerdict::Indeterminate;
    double value = std::numeric_limits<double>::infinity();
    double local_exponent = 0;   // fitted contact order of 1 - q/p at its zero set
    double quadrature_error = 0;
    std::string diagnostics;
};

namespace detail {

struct ContactZero {
    double param;
    double exponent;     // fitted order of vanishing
    double fit_residual; // rms deviation of the log-log fit
};

}  // namespace detail

/// Adaptive quadrature of 1/sqrt(1 - q/p) over Sigma_k with divergence
/// classification. Zeros of 1 - q/p are located on a dense parameter grid,
/// their contact order is fitted by log-log regression on nested
/// neighborhoods, and order >= 2 (or a non-Cauchy partial-integral ladder
/// exceeding the cap) declares divergence.
inline AttainmentResult attainment_integral(const WeightTriple& w, const Scenario& s, double tol) {
    SigmaChart chart = SigmaChart::of(s);
    if (chart.dim != 1 && s.kind == ScenarioKind::FlatSlab && s.k > 1)
        throw std::invalid_argument("attainment_integral: slab patches with k > 1 not supported");

    auto gap = [&](double t) {
        std::array<double, 1> prm{t};
        Vec sig = sigma_point(s, prm);
        return 1.0 - w.q.on_sigma(sig, t) / w.p.on_sigma(sig, t);
    };
    auto integrand = [&](double t) {
        std::array<double, 1> prm{t};
        const double g = gap(t);
        return sigma_measure(s, prm) / std::sqrt(std::max(g, 1e-300));
    };

    AttainmentResult res;

    // locate the zero set of the gap
    const int n_scan = 4096;
    const double span = chart.hi - chart.lo;
    std::vector<detail::ContactZero> zeros;
    double min_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_scan; ++i) {
        const double t = chart.lo + span * (i + 0.5) / n_scan;
        const double g = gap(t);
        min_gap = std::min(min_gap, g);
        if (g < -1e-8) throw WeightHypothesisError("q/p <= 1 on Sigma_k");
        const double gl = gap(chart.lo + span * (i - 0.5) / n_scan);
        const double gr = gap(chart.lo + span * (i + 1.5) / n_scan);
        if (g <= gl && g <= gr && g < 1e-4) {
            // local minimum candidate: refine by golden section
            double a = chart.lo + span * (i - 0.5) / n_scan;
            double b = chart.lo + span * (i + 1.5) / n_scan;
            const double gr_ratio = (std::sqrt(5.0) - 1) / 2;
            double c = b - gr_ratio * (b - a), dd = a + gr_ratio * (b - a);
            while (b - a > 1e-14) {
                if (gap(c) < gap(dd)) b = dd; else a = c;
                c = b - gr_ratio * (b - a);
                dd = a + gr_ratio * (b - a);
            }
            const double t0 = 0.5 * (a + b);
            if (gap(t0) < 1e-9) {
                bool dup = false;
                for (const auto& z : zeros)
                    if (std::abs(z.param - t0) < 1e-6 * span) dup = true;
                if (!dup) zeros.push_back({t0, 0, 0});
            }
        }
    }

    // fit the contact order at each zero by log-log regression on a
    // two-sided geometric ladder of offsets
    double worst_exponent = 0;
    bool ill_conditioned = false;
    for (auto& z : zeros) {
        std::vector<double> taus, gaps;
        for (int j = 4; j <= 22; ++j) {
            const double tau = span * std::pow(0.5, j);
            const double gplus = gap(z.param + tau), gminus = gap(z.param - tau);
            const double g = 0.5 * (gplus + gminus);
            if (g > 1e-13) {
                taus.push_back(tau);
                gaps.push_back(g);
            }
        }
        if (taus.size() < 5) {
            ill_conditioned = true;
            continue;
        }
        z.exponent = loglog_slope(taus, gaps);
        // rms residual of the fit
        double c0 = 0;
        for (std::size_t i = 0; i < taus.size(); ++i)
            c0 += std::log(gaps[i]) - z.exponent * std::log(taus[i]);
        c0 /= double(taus.size());
        double rss = 0;
        for (std::size_t i = 0; i < taus.size(); ++i) {
            const double r = std::log(gaps[i]) - z.exponent * std::log(taus[i]) - c0;
            rss += r * r;
        }
        z.fit_residual = std::sqrt(rss / double(taus.size()));
        if (z.fit_residual > 0.5) ill_conditioned = true;
        worst_exponent = std::max(worst_exponent, z.exponent);
    }
    res.local_exponent = worst_exponent;

    if (!zeros.empty() && ill_conditioned) {
        // secondary route: partial-integral ladder over shrinking exclusions
        double prev = 0;
        bool cauchy = false;
        double last_inc = std::numeric_limits<double>::infinity();
        for (int j = 3; j <= 14; ++j) {
            const double cut = span * std::pow(0.5, j);
            double total = 0;
            double a = chart.lo;
            std::vector<std::pair<double, double>> segs;
            std::vector<double> zs;
            for (const auto& z : zeros) zs.push_back(z.param);
            std::sort(zs.begin(), zs.end());
            for (double zp : zs) {
                if (zp - cut > a) segs.push_back({a, zp - cut});
                a = zp + cut;
            }
            if (a < chart.hi) segs.push_back({a, chart.hi});
            for (auto [sa, sb] : segs)
                total += integrate_adaptive(integrand, sa, sb, tol).value;
            const double inc = total - prev;
            if (j > 3 && inc < 0.05 * last_inc) cauchy = true;
            if (total > 1e6) {
                res.verdict = AttainmentVerdict::Divergent;
                res.diagnostics = "partial integrals exceeded cap without Cauchy behavior";
                return res;
            }
            last_inc = inc;
            prev = total;
        }
        res.verdict = cauchy ? AttainmentVerdict::Finite : AttainmentVerdict::Divergent;
        if (res.verdict == AttainmentVerdict::Divergent) {
            res.diagnostics = "ladder increments not Cauchy";
            return res;
        }
    } else if (!zeros.empty() && worst_exponent >= 1.9) {
        res.verdict = AttainmentVerdict::Divergent;
        res.diagnostics = "contact order >= 2 at the zero set of 1 - q/p";
        return res;
    } else if (!zeros.empty() && worst_exponent > 1.6) {
        res.verdict = AttainmentVerdict::Indeterminate;
        res.diagnostics = "contact order between integrable and divergent regimes";
        return res;
    }

    QuadResult q = integrate_adaptive(integrand, chart.lo, chart.hi, tol);
    res.value = q.value;
    res.quadrature_error = q.error;
    res.verdict = AttainmentVerdict::Finite;
    if (!q.converged) res.diagnostics = "quadrature error estimate above tolerance";
    return res;
}

/// The sqrt(p)-substitution: solving with weights (p, q, eta) is equivalent
/// to solving with (1, q/p, eta/p) plus the bounded extra potential
///   V_extra = -lap(p)/(2p) + |grad p|^2 / (4 p^2).
/// p must be expressed in ambient coordinates so the derivatives exist
/// symbolically.
struct PNormalization {
    Expression q_over_p;
    Expression eta_over_p;
    Expression v_extra;
};

inline PNormalization normalize_p(const WeightTriple& w, const Scenario& s) {
    const Expression& p = w.p.expression();
    for (const auto& v : p.variables())
        if (!(v.size() >= 2 && v[0] == 'x'))
            throw std::invalid_argument(
                "normalize_p: p must be a C^2 descriptor over ambient coordinates; found '" + v +
                "'");
    Expression lap = Expression::constant(0);
    Expression grad2 = Expression::constant(0);
    for (std::size_t i = 1; i <= s.N; ++i) {
        const std::string xi = "x" + std::to_string(i);
        Expression di = p.derivative(xi);
        lap = lap + di.derivative(xi);
        grad2 = grad2 + di * di;
    }
    PNormalization out;
    const Expression half = Expression::constant(0.5);
    const Expression quarter = Expression::constant(0.25);
    out.v_extra = Expression::constant(0) - half * (lap / p) + quarter * (grad2 / (p * p));
    out.q_over_p = w.q.expression() / p;
    out.eta_over_p = w.eta.expression() / p;
    return out;
}

}  // namespace hardy
