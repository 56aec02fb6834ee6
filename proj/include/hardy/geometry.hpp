#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hardy/core.hpp"
#include "hardy/expression.hpp"

namespace hardy {

enum class ScenarioKind { FlatSlab, BallEquator, ParametricCurveOnSphere };

inline std::string to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::FlatSlab: return "flat_slab";
        case ScenarioKind::BallEquator: return "ball_equator";
        case ScenarioKind::ParametricCurveOnSphere: return "parametric_curve_on_sphere";
    }
    return "?";
}

/// A point of the half-tubular collar around the singular submanifold,
/// with every distance quantity the constructions need:
///   d    distance to the boundary
///   delta        distance to the submanifold
///   delta_hat    geodesic distance to the submanifold within the boundary,
///                evaluated at the boundary projection xbar
///   delta_tilde  projection distance sqrt(delta_hat^2 + d^2)
struct CollarPoint {
    Vec x;
    double d = 0;
    double delta = 0;
    Vec xbar;
    double delta_hat = 0;
    Vec sigma;
    double delta_tilde = 0;
    bool singular = false;  // set when x lies on the submanifold
};

class OutsideCollar : public std::runtime_error {
public:
    OutsideCollar(double delta_tilde, double beta)
        : std::runtime_error("point outside collar: delta_tilde = " + std::to_string(delta_tilde) +
                             " >= beta = " + std::to_string(beta)),
          delta_tilde(delta_tilde), beta(beta) {}
    double delta_tilde, beta;
};

class OutsideDomain : public std::runtime_error {
public:
    explicit OutsideDomain(const std::string& what) : std::runtime_error(what) {}
};

/// Closed curve on the unit sphere given by three component expressions of
/// a parameter t in [0, 2pi). Projections are computed by dense sampling
/// plus golden-section refinement; this is the extension point for
/// user-supplied k=1 submanifolds beyond the built-in equator.
class CurveOnSphere {
public:
    CurveOnSphere() = default;
    CurveOnSphere(Expression cx, Expression cy, Expression cz, int samples = 512)
        : cx_(std::move(cx)), cy_(std::move(cy)), cz_(std::move(cz)), n_(samples) {}

    Vec point(double t) const {
        VarEnv env{{"t", t}};
        Vec p{cx_.eval(env), cy_.eval(env), cz_.eval(env)};
        const double r = norm(p);
        if (!(r > 0)) throw std::domain_error("curve passes through the origin");
        return (1.0 / r) * p;  // keep the curve on the sphere
    }

    Vec tangent(double t) const {
        const double h = 1e-6;
        Vec d = point(t + h) - point(t - h);
        d *= 1.0 / (2 * h);
        // project out the radial component, then normalize
        Vec p = point(t);
        d -= dot(d, p) * p;
        const double m = norm(d);
        if (!(m > 0)) throw std::domain_error("curve has a stationary point");
        return (1.0 / m) * d;
    }

    double speed(double t) const {
        const double h = 1e-6;
        Vec d = point(t + h) - point(t - h);
        return norm(d) / (2 * h);
    }

    /// Parameter of the nearest curve point under `cost`, resolved to ~1e-12.
    template <class Cost>
    double argmin(Cost&& cost) const {
        double best_t = 0, best = cost(point(0));
        for (int i = 1; i < n_; ++i) {
            const double t = 2 * M_PI * i / n_;
            const double c = cost(point(t));
            if (c < best) { best = c; best_t = t; }
        }
        // golden-section on the bracketing interval
        const double gr = (std::sqrt(5.0) - 1) / 2;
        double a = best_t - 2 * M_PI / n_, b = best_t + 2 * M_PI / n_;
        double c = b - gr * (b - a), d = a + gr * (b - a);
        while (b - a > 1e-13) {
            if (cost(point(c)) < cost(point(d))) b = d; else a = c;
            c = b - gr * (b - a);
            d = a + gr * (b - a);
        }
        return 0.5 * (a + b);
    }

    double length() const {
        // simple composite rule; curves of interest are smooth
        const int m = 4 * n_;
        double L = 0;
        for (int i = 0; i < m; ++i) L += speed(2 * M_PI * (i + 0.5) / m) * (2 * M_PI / m);
        return L;
    }

private:
    Expression cx_, cy_, cz_;
    int n_ = 512;
};

/// A concrete (Omega, Sigma_k, N, k) geometry with analytic distance
/// evaluators. FlatSlab is Omega = (0,1) x (-1,1)^{N-1} with Sigma_k a
/// centered patch of the face {x1 = 0}; BallEquator is the unit ball with
/// the equator circle.
struct Scenario {
    ScenarioKind kind = ScenarioKind::FlatSlab;
    std::size_t N = 3;
    std::size_t k = 1;
    double beta = 0.1;
    double patch_half_width = 0.5;  // FlatSlab tangent extent
    CurveOnSphere curve;            // ParametricCurveOnSphere only

    static Scenario flat_slab(std::size_t N, std::size_t k, double beta) {
        if (N < 3) throw std::invalid_argument("flat_slab: N >= 3 required");
        if (k < 1 || k > N - 2) throw std::invalid_argument("flat_slab: need 1 <= k <= N-2");
        if (!(beta > 0) || beta > 0.25)
            throw std::invalid_argument("flat_slab: beta must lie in (0, 0.25]");
        Scenario s;
        s.kind = ScenarioKind::FlatSlab;
        s.N = N;
        s.k = k;
        s.beta = beta;
        return s;
    }

    static Scenario ball_equator(double beta) {
        // delta_tilde stays smooth while the collar avoids the poles and the
        // center; 0.9 keeps a margin to both
        if (!(beta > 0) || beta > 0.9)
            throw std::invalid_argument("ball_equator: beta must lie in (0, 0.9]");
        Scenario s;
        s.kind = ScenarioKind::BallEquator;
        s.N = 3;
        s.k = 1;
        s.beta = beta;
        return s;
    }

    static Scenario parametric_curve(CurveOnSphere c, double beta) {
        if (!(beta > 0) || beta > 0.25)
            throw std::invalid_argument("parametric_curve: beta must lie in (0, 0.25]");
        Scenario s;
        s.kind = ScenarioKind::ParametricCurveOnSphere;
        s.N = 3;
        s.k = 1;
        s.beta = beta;
        s.curve = std::move(c);
        return s;
    }

    std::size_t codim() const { return N - k; }  // m = N - k

    bool inside(const Vec& x) const {
        switch (kind) {
            case ScenarioKind::FlatSlab: {
                if (x[0] <= 0 || x[0] >= 1) return false;
                for (std::size_t i = 1; i < N; ++i)
                    if (std::abs(x[i]) >= 1) return false;
                return true;
            }
            case ScenarioKind::BallEquator:
            case ScenarioKind::ParametricCurveOnSphere:
                return norm(x) < 1.0;
        }
        return false;
    }

    // The ball distances are formed in extended precision: d = 1 - |x| and
    // rho - 1 lose ~half the mantissa near the shell, and sign sweeps
    // difference W across stencils of width 1e-3 * delta_tilde, which
    // amplifies that loss by 1/h^2.
    static long double radius_l(const Vec& x) {
        long double s = 0;
        for (std::size_t i = 0; i < x.size(); ++i)
            s += static_cast<long double>(x[i]) * static_cast<long double>(x[i]);
        return sqrtl(s);
    }

    /// Distance to the boundary of Omega.
    double dist_boundary(const Vec& x) const {
        switch (kind) {
            case ScenarioKind::FlatSlab: {
                double d = std::min(x[0], 1 - x[0]);
                for (std::size_t i = 1; i < N; ++i) d = std::min(d, 1 - std::abs(x[i]));
                return d;
            }
            case ScenarioKind::BallEquator:
            case ScenarioKind::ParametricCurveOnSphere:
                return double(1.0L - radius_l(x));
        }
        return 0;
    }

    /// Distance to the singular submanifold Sigma_k.
    double dist_sigma(const Vec& x) const {
        switch (kind) {
            case ScenarioKind::FlatSlab: {
                double s2 = x[0] * x[0];
                for (std::size_t i = 1; i < N - k; ++i) s2 += x[i] * x[i];
                for (std::size_t a = N - k; a < N; ++a) {
                    const double off = std::max(std::abs(x[a]) - patch_half_width, 0.0);
                    s2 += off * off;
                }
                return std::sqrt(s2);
            }
            case ScenarioKind::BallEquator: {
                const long double rho =
                    hypotl(static_cast<long double>(x[0]), static_cast<long double>(x[1]));
                return double(hypotl(rho - 1.0L, static_cast<long double>(x[2])));
            }
            case ScenarioKind::ParametricCurveOnSphere: {
                const double t = curve.argmin([&](const Vec& c) { return dot(x - c, x - c); });
                return norm(x - curve.point(t));
            }
        }
        return 0;
    }

    /// Plain-double distance to Sigma_k for quadrature hot loops, where the
    /// extended-precision path is unnecessary (no stencil differencing).
    double dist_sigma_fast(const Vec& x) const {
        if (kind == ScenarioKind::BallEquator) {
            const double rho = std::hypot(x[0], x[1]);
            return std::hypot(rho - 1.0, x[2]);
        }
        return dist_sigma(x);
    }

    /// Projection distance sqrt(delta_hat^2 + d^2); cheap path that skips
    /// assembling the full CollarPoint.
    double delta_tilde(const Vec& x) const {
        switch (kind) {
            case ScenarioKind::FlatSlab:
                return dist_sigma(x);  // flat face: geodesic = Euclidean, so both agree
            case ScenarioKind::BallEquator: {
                const long double r = radius_l(x);
                if (!(r > 0)) throw OutsideDomain("delta_tilde undefined at the center");
                const long double dhat = fabsl(asinl(static_cast<long double>(x[2]) / r));
                return double(hypotl(dhat, 1.0L - r));
            }
            case ScenarioKind::ParametricCurveOnSphere: {
                const double r = norm(x);
                if (!(r > 0)) throw OutsideDomain("delta_tilde undefined at the center");
                Vec xb = (1.0 / r) * x;
                const double t =
                    curve.argmin([&](const Vec& c) { return -dot(xb, c); });  // max cos angle
                const double dhat = std::acos(std::clamp(dot(xb, curve.point(t)), -1.0, 1.0));
                return std::hypot(dhat, 1.0 - r);
            }
        }
        return 0;
    }
};

/// Populates all seven collar fields from the analytic formulas.
/// Throws OutsideDomain / OutsideCollar when the preconditions fail; a point
/// exactly on Sigma_k comes back flagged singular instead.
inline CollarPoint eval_collar_point(const Scenario& s, const Vec& x) {
    if (x.size() != s.N) throw std::invalid_argument("eval_collar_point: dimension mismatch");

    CollarPoint cp;
    cp.x = x;
    cp.d = s.dist_boundary(x);
    // closure membership: boundary points (d = 0) are allowed so that points
    // of Sigma_k itself come back flagged singular
    if (cp.d < 0) throw OutsideDomain("eval_collar_point: x is not inside closure(Omega)");

    switch (s.kind) {
        case ScenarioKind::FlatSlab: {
            cp.xbar = x;
            cp.xbar[0] = 0.0;
            double dh2 = 0;
            for (std::size_t i = 1; i < s.N - s.k; ++i) dh2 += x[i] * x[i];
            cp.sigma = Vec(s.N);
            for (std::size_t a = s.N - s.k; a < s.N; ++a) {
                const double c = std::clamp(x[a], -s.patch_half_width, s.patch_half_width);
                cp.sigma[a] = c;
                dh2 += (x[a] - c) * (x[a] - c);
            }
            cp.delta_hat = std::sqrt(dh2);
            cp.delta = s.dist_sigma(x);
            break;
        }
        case ScenarioKind::BallEquator: {
            const long double r = Scenario::radius_l(x);
            if (!(r > 0)) throw OutsideDomain("eval_collar_point: center of the ball");
            cp.xbar = (1.0 / double(r)) * x;
            cp.delta_hat = double(fabsl(asinl(static_cast<long double>(x[2]) / r)));
            const double rho = std::hypot(x[0], x[1]);
            if (rho > 0)
                cp.sigma = Vec{x[0] / rho, x[1] / rho, 0.0};
            else
                throw OutsideDomain("eval_collar_point: polar axis (delta_hat cut locus)");
            cp.delta = s.dist_sigma(x);
            break;
        }
        case ScenarioKind::ParametricCurveOnSphere: {
            const double r = norm(x);
            if (!(r > 0)) throw OutsideDomain("eval_collar_point: center of the ball");
            cp.xbar = (1.0 / r) * x;
            const Vec xb = cp.xbar;
            const double tg = s.curve.argmin([&](const Vec& c) { return -dot(xb, c); });
            cp.sigma = s.curve.point(tg);
            cp.delta_hat = std::acos(std::clamp(dot(cp.xbar, cp.sigma), -1.0, 1.0));
            cp.delta = s.dist_sigma(x);
            break;
        }
    }

    cp.delta_tilde = std::hypot(cp.delta_hat, cp.d);  // assembled, never measured
    if (cp.delta_tilde == 0.0) {
        cp.singular = true;
        return cp;
    }
    if (cp.delta_tilde >= s.beta) throw OutsideCollar(cp.delta_tilde, s.beta);
    return cp;
}

class OutOfChart : public std::runtime_error {
public:
    OutOfChart(double r, double radius)
        : std::runtime_error("Fermi coordinates out of chart: |y| = " + std::to_string(r) +
                             " >= radius = " + std::to_string(radius)) {}
};

/// Fermi chart centered at a point of Sigma_k: y = (y1, ybreve, ybar) with
/// y1 the inward-normal offset, ybreve the within-boundary normal arcs and
/// ybar the tangent arcs. Radius is beta/2 so FD stencils stay inside the
/// smoothness region.
struct FermiChart {
    Scenario scenario;
    Vec base;             // P = F(0)
    double base_param = 0;  // equator angle / curve parameter of P
    double radius = 0;

    Vec map(const Vec& y) const {
        if (y.size() != scenario.N) throw std::invalid_argument("fermi_map: dimension mismatch");
        if (norm(y) >= radius) throw OutOfChart(norm(y), radius);
        switch (scenario.kind) {
            case ScenarioKind::FlatSlab: {
                Vec x = base;
                for (std::size_t i = 0; i < scenario.N; ++i) x[i] += y[i];
                return x;
            }
            case ScenarioKind::BallEquator: {
                // equator arc ybar = y[2], meridian arc ybreve = y[1], inward normal y[0]
                const double phi = base_param + y[2];
                const double th = y[1];
                Vec h{std::cos(th) * std::cos(phi), std::cos(th) * std::sin(phi), std::sin(th)};
                return (1.0 - y[0]) * h;
            }
            case ScenarioKind::ParametricCurveOnSphere: {
                // tangent arc ybar = y[2] along the curve (arclength via speed at base),
                // ybreve = y[1] along the sphere geodesic normal to the curve
                const double t = base_param + y[2] / scenario.curve.speed(base_param);
                Vec c = scenario.curve.point(t);
                Vec tg = scenario.curve.tangent(t);
                Vec nu{c[1] * tg[2] - c[2] * tg[1], c[2] * tg[0] - c[0] * tg[2],
                       c[0] * tg[1] - c[1] * tg[0]};
                Vec h = std::cos(y[1]) * c + std::sin(y[1]) * nu;
                return (1.0 - y[0]) * h;
            }
        }
        return base;
    }
};

/// Chart at the patch point with tangent coordinates `ybar` (FlatSlab) or at
/// angle/parameter `param` (BallEquator, ParametricCurveOnSphere).
inline FermiChart make_chart(const Scenario& s, double param = 0.0,
                             const std::vector<double>& ybar = {}) {
    FermiChart c;
    c.scenario = s;
    c.radius = s.beta / 2;
    c.base_param = param;
    switch (s.kind) {
        case ScenarioKind::FlatSlab: {
            c.base = Vec(s.N);
            for (std::size_t a = 0; a < s.k; ++a) {
                double v = a < ybar.size() ? ybar[a] : 0.0;
                if (std::abs(v) > s.patch_half_width)
                    throw std::invalid_argument("make_chart: base outside the patch");
                c.base[s.N - s.k + a] = v;
            }
            break;
        }
        case ScenarioKind::BallEquator:
            c.base = Vec{std::cos(param), std::sin(param), 0.0};
            break;
        case ScenarioKind::ParametricCurveOnSphere:
            c.base = s.curve.point(param);
            break;
    }
    return c;
}

/// Metric components g_ab = <dF/dy_a, dF/dy_b> by central differences,
/// with the residuals that the metric expansion predicts to vanish:
///   res_g11 = |g11 - 1|, res_g1b = max_b |g_1b|,
///   res_offdiag = max_{a,b>=2} |g_ab - delta_ab| / |ytilde|.
struct MetricReport {
    std::array<std::array<double, kMaxDim>, kMaxDim> g{};
    double res_g11 = 0;
    double res_g1b = 0;
    double res_offdiag = 0;
};

inline MetricReport metric_components(const FermiChart& chart, const Vec& y, double h_fd) {
    const std::size_t N = chart.scenario.N;
    if (!(h_fd > 0)) throw std::invalid_argument("metric_components: h_fd must be positive");
    if (norm(y) + 2 * h_fd >= chart.radius)
        throw OutOfChart(norm(y) + 2 * h_fd, chart.radius);

    std::array<Vec, kMaxDim> dF;
    for (std::size_t a = 0; a < N; ++a) {
        Vec yp = y, ym = y;
        yp[a] += h_fd;
        ym[a] -= h_fd;
        dF[a] = chart.map(yp) - chart.map(ym);
        dF[a] *= 1.0 / (2 * h_fd);
    }
    MetricReport rep;
    double yt2 = 0;
    for (std::size_t i = 0; i < N - chart.scenario.k; ++i) yt2 += y[i] * y[i];
    const double ytilde = std::sqrt(yt2);
    for (std::size_t a = 0; a < N; ++a)
        for (std::size_t b = 0; b < N; ++b) rep.g[a][b] = dot(dF[a], dF[b]);
    rep.res_g11 = std::abs(rep.g[0][0] - 1.0);
    for (std::size_t b = 1; b < N; ++b) rep.res_g1b = std::max(rep.res_g1b, std::abs(rep.g[0][b]));
    for (std::size_t a = 1; a < N; ++a)
        for (std::size_t b = 1; b < N; ++b) {
            const double dev = std::abs(rep.g[a][b] - (a == b ? 1.0 : 0.0));
            rep.res_offdiag = std::max(rep.res_offdiag, ytilde > 0 ? dev / ytilde : dev);
        }
    return rep;
}

}  // namespace hardy
