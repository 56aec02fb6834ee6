#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "hardy/constructions.hpp"
#include "hardy/core.hpp"
#include "hardy/geometry.hpp"
#include "hardy/quadrature.hpp"
#include "hardy/weights.hpp"

namespace hardy {

namespace detail {

/// C^2 cutoff: 1 on [0, 1/2], 0 on [1, inf), quintic smoothstep between.
inline double cutoff(double t) {
    if (t <= 0.5) return 1.0;
    if (t >= 1.0) return 0.0;
    const double u = 2 * (t - 0.5);
    return 1.0 - u * u * u * (10 - 15 * u + 6 * u * u);
}

inline double cutoff_prime(double t) {
    if (t <= 0.5 || t >= 1.0) return 0.0;
    const double u = 2 * (t - 0.5);
    return -2 * (30 * u * u - 60 * u * u * u + 30 * u * u * u * u);
}

/// The flat-model profile u(y) = y1 |ytilde|^{-m/2 + tp} cutoff(|y|) and its
/// gradient, in the reduced variables (y1, rho = |ybreve|, rhobar = |ybar|).
struct FlatProfile {
    double m, tp;

    double value(double y1, double rho, double rhobar) const {
        const double rt = std::hypot(y1, rho);
        const double R = std::sqrt(rt * rt + rhobar * rhobar);
        if (!(rt > 0)) return 0.0;
        return y1 * std::pow(rt, -m / 2 + tp) * cutoff(R);
    }

    /// |grad u|^2 via u = y1 g(rt) chi(R): g' and chi' are analytic.
    double grad_sq(double y1, double rho, double rhobar) const {
        const double rt = std::hypot(y1, rho);
        const double R = std::sqrt(rt * rt + rhobar * rhobar);
        if (!(rt > 0) || R >= 1.0) return 0.0;
        const double g = std::pow(rt, -m / 2 + tp);
        const double gp = (-m / 2 + tp) * std::pow(rt, -m / 2 + tp - 1);
        const double chi = cutoff(R), chip = cutoff_prime(R);
        const double e1_d = gp * chi * y1 / rt + g * chip * y1 / R;
        return g * g * chi * chi + 2 * y1 * g * chi * e1_d +
               y1 * y1 *
                   (gp * gp * chi * chi + 2 * g * gp * chi * chip * rt / R + g * g * chip * chip);
    }
};

/// Rayleigh ratio of the flat model: int |grad u|^2 / int |ytilde|^-2 u^2
/// over the half-space, reduced to a 3D radial integral.
inline double flat_model_ratio(std::size_t N, std::size_t k, double tp) {
    const double m = double(N - k);
    FlatProfile prof{m, tp};
    std::vector<double> gn, gw;
    gauss_legendre(24, gn, gw);
    // polar transverse coordinates: y1 = r cos(th), rho = r sin(th),
    // th in (-pi/2, pi/2) for m = 2, (0, pi/2) with sin^{m-2} weight otherwise
    auto shell = [&](double r, bool dirichlet) {
        double acc = 0;
        for (int it = 0; it < 24; ++it) {
            const double th = (gn[it] + 1) * (M_PI / 4);  // (0, pi/2)
            const double wt = gw[it] * (M_PI / 4);
            const double y1 = r * std::cos(th), rho = r * std::sin(th);
            const double ang = m >= 3 ? std::pow(std::sin(th), m - 2) : 1.0;
            for (int ib = 0; ib < 24; ++ib) {
                const double rb = (gn[ib] + 1) * 0.5;  // rhobar in (0,1)
                const double wb = gw[ib] * 0.5;
                const double bar = k >= 2 ? std::pow(rb, double(k) - 1) : 1.0;
                const double f = dirichlet
                                     ? prof.grad_sq(y1, rho, rb)
                                     : std::pow(prof.value(y1, rho, rb), 2) / (r * r);
                acc += wt * wb * f * ang * bar;
            }
        }
        return acc * std::pow(r, m - 1);
    };
    const double num =
        integrate_singular_endpoint([&](double r) { return shell(r, true); }, 1.0, 1e-7).value;
    const double den =
        integrate_singular_endpoint([&](double r) { return shell(r, false); }, 1.0, 1e-7).value;
    return num / den;
}

/// Smallest tau' from a fixed ladder whose flat ratio meets
/// (m^2/4 + tau); deterministic by construction.
inline double tune_tau_prime(std::size_t N, std::size_t k, double tau) {
    const double target = std::pow(double(N - k), 2) / 4 + tau;
    double best = -1;
    for (double tp : {0.5, 0.35, 0.25, 0.18, 0.12, 0.08, 0.05}) {
        if (flat_model_ratio(N, k, tp) <= target) best = tp;
    }
    if (best < 0)
        throw std::runtime_error("tune_tau_prime: no ladder entry meets the target ratio");
    return best;
}

}  // namespace detail

struct ConcentrationResult {
    double tau_prime = 0;
    double flat_ratio = 0;  // certified flat-model ratio <= m^2/4 + tau
    std::vector<std::pair<double, double>> quotient_by_eps;  // (eps, quotient)
    double infimum = 0;
};

/// Step-1 concentration bound: pushes the flat-model test function through
/// the Fermi chart at a maximizing point of q/p, scaled by each eps of the
/// ladder, and evaluates the full weighted quotient. The infimum over the
/// ladder upper-bounds mu_lambda. N = 3 scenarios only.
inline ConcentrationResult concentration_upper_bound(const Scenario& s, const WeightTriple& w,
                                                     double lambda, double tau,
                                                     std::span<const double> eps_ladder) {
    if (s.N != 3)
        throw std::invalid_argument("concentration_upper_bound: implemented for N = 3 scenarios");
    ConcentrationResult out;
    out.tau_prime = detail::tune_tau_prime(s.N, s.k, tau);
    out.flat_ratio = detail::flat_model_ratio(s.N, s.k, out.tau_prime);

    // sigma_0: maximizer of q/p over Sigma_k
    SigmaChart chart_dom = SigmaChart::of(s);
    double psi0 = chart_dom.lo, best = -1e300;
    for (int i = 0; i < 2048; ++i) {
        const double t = chart_dom.lo + (chart_dom.hi - chart_dom.lo) * (i + 0.5) / 2048;
        std::array<double, 1> prm{t};
        Vec sig = sigma_point(s, prm);
        const double ratio = w.q.on_sigma(sig, t) / w.p.on_sigma(sig, t);
        if (ratio > best) {
            best = ratio;
            psi0 = t;
        }
    }
    FermiChart chart = s.kind == ScenarioKind::FlatSlab ? make_chart(s, 0.0, {psi0})
                                                        : make_chart(s, psi0);

    detail::FlatProfile prof{double(s.N - s.k), out.tau_prime};
    std::vector<double> gn, gw;
    gauss_legendre(20, gn, gw);

    out.infimum = std::numeric_limits<double>::infinity();
    for (double eps : eps_ladder) {
        if (eps >= chart.radius)
            throw std::invalid_argument("concentration_upper_bound: eps exceeds the chart radius");
        // quadrature over y in the support: polar (r, th) in the ytilde plane,
        // Gauss in the tangent coordinate
        auto shell = [&](double r) {
            double num1 = 0, num2 = 0, den = 0;
            for (int it = 0; it < 20; ++it) {
                const double th = gn[it] * (M_PI / 2);  // (-pi/2, pi/2): the half-disc y1 > 0
                const double wt = gw[it] * (M_PI / 2);
                const double y1 = r * std::cos(th);
                const double y2 = r * std::sin(th);
                for (int ib = 0; ib < 20; ++ib) {
                    const double y3 = eps * (gn[ib]);  // tangent span (-eps, eps)
                    const double wb = gw[ib] * eps;
                    Vec y{y1, y2, y3};
                    if (norm(y) >= eps) continue;
                    // scaled profile and its chart-coordinate gradient
                    const double inv = 1.0 / eps;
                    const double uy = prof.value(y1 * inv, std::abs(y2) * inv, std::abs(y3) * inv);
                    if (uy == 0.0) continue;
                    // gradient of u(y/eps) in y: FD on the profile (cheap, smooth)
                    const double hfd = 1e-6 * eps;
                    Vec du(3);
                    for (int a = 0; a < 3; ++a) {
                        Vec yp = y, ym = y;
                        yp[a] += hfd;
                        ym[a] -= hfd;
                        du[a] = (prof.value(yp[0] * inv, std::abs(yp[1]) * inv,
                                            std::abs(yp[2]) * inv) -
                                 prof.value(ym[0] * inv, std::abs(ym[1]) * inv,
                                            std::abs(ym[2]) * inv)) /
                                (2 * hfd);
                    }
                    Vec x = chart.map(y);
                    MetricReport mr = metric_components(chart, y, 1e-5 * std::max(1.0, eps));
                    // inverse metric and volume element (3x3)
                    double g[3][3];
                    for (int a = 0; a < 3; ++a)
                        for (int b = 0; b < 3; ++b) g[a][b] = mr.g[a][b];
                    const double det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) -
                                       g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0]) +
                                       g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
                    double ginv[3][3];
                    ginv[0][0] = (g[1][1] * g[2][2] - g[1][2] * g[2][1]) / det;
                    ginv[0][1] = (g[0][2] * g[2][1] - g[0][1] * g[2][2]) / det;
                    ginv[0][2] = (g[0][1] * g[1][2] - g[0][2] * g[1][1]) / det;
                    ginv[1][0] = ginv[0][1];
                    ginv[1][1] = (g[0][0] * g[2][2] - g[0][2] * g[2][0]) / det;
                    ginv[1][2] = (g[0][2] * g[1][0] - g[0][0] * g[1][2]) / det;
                    ginv[2][0] = ginv[0][2];
                    ginv[2][1] = ginv[1][2];
                    ginv[2][2] = (g[0][0] * g[1][1] - g[0][1] * g[1][0]) / det;
                    double grad2 = 0;
                    for (int a = 0; a < 3; ++a)
                        for (int b = 0; b < 3; ++b) grad2 += ginv[a][b] * du[a] * du[b];
                    const double vol = std::sqrt(det);
                    const double delta = s.dist_sigma(x);
                    const double wq = wt * wb * vol;
                    num1 += wq * w.p(x) * grad2;
                    num2 += wq * w.eta(x) / (delta * delta) * uy * uy;
                    den += wq * w.q(x) / (delta * delta) * uy * uy;
                }
            }
            return std::array<double, 3>{num1 * r, num2 * r, den * r};
        };
        // fixed-panel radial quadrature over (0, eps): geometric refinement
        // toward 0 where the profile is steep
        double N1 = 0, N2 = 0, D = 0;
        double hi_r = eps;
        for (int panel = 0; panel < 40 && hi_r > 1e-12 * eps; ++panel) {
            const double lo_r = hi_r / 2;
            for (int iq = 0; iq < 20; ++iq) {
                const double r = lo_r + (gn[iq] + 1) * 0.5 * (hi_r - lo_r);
                const double wr = gw[iq] * 0.5 * (hi_r - lo_r);
                auto v = shell(r);
                N1 += wr * v[0];
                N2 += wr * v[1];
                D += wr * v[2];
            }
            hi_r = lo_r;
        }
        const double quotient = (N1 - lambda * N2) / D;
        out.quotient_by_eps.emplace_back(eps, quotient);
        out.infimum = std::min(out.infimum, quotient);
    }
    return out;
}

}  // namespace hardy
