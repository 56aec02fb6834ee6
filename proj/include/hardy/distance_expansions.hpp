#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "hardy/core.hpp"
#include "hardy/finite_difference.hpp"
#include "hardy/geometry.hpp"

namespace hardy {

/// Residuals of the four small-delta_tilde expansions at one sample:
///   r1 = |delta^2/delta_tilde^2 - 1| / delta_tilde
///   r2 = |grad(delta_tilde) . grad(d) - d/delta_tilde|        (exact identity)
///   r3 = ||grad(delta_tilde)| - 1| / delta_tilde
///   r4 = |lap(delta_tilde) - (N-k-1)/delta_tilde|
struct ExpansionSample {
    Vec x;
    double delta_tilde = 0;
    std::array<double, 4> r{};
    bool excluded = false;
    std::string reason;
};

struct ExpansionReport {
    std::vector<ExpansionSample> samples;
    std::vector<double> rungs;                   // target delta_tilde ladder
    std::array<std::vector<double>, 4> fitted;   // per-rung constant fit (mean residual)
    std::array<double, 4> fit_ratio{};           // max/min of the fitted constants per item
};

/// Collar samples with exact prescribed delta_tilde, generated through the
/// Fermi chart so every rung shares the same angular distribution. theta
/// splits delta_tilde between d and delta_hat; points too close to the
/// boundary (theta ~ 0) are avoided so FD stencils stay inside Omega.
inline std::vector<Vec> collar_samples_at(const Scenario& s, double delta_tilde, int n,
                                          std::uint64_t seed = 0) {
    std::vector<Vec> out;
    out.reserve(n);
    Halton seq(3, seed);
    for (int i = 0; i < n; ++i) {
        Vec u = seq.point(i);
        const double theta = 0.15 + u[0] * (M_PI / 2 - 0.3);  // d/delta_hat split, away from edges
        const double d = delta_tilde * std::sin(theta);
        const double dh = delta_tilde * std::cos(theta);
        switch (s.kind) {
            case ScenarioKind::FlatSlab: {
                Vec x(s.N);
                x[0] = d;
                if (s.N - s.k == 2) {
                    x[1] = (u[1] < 0.5 ? -1 : 1) * dh;
                } else {
                    const double w = 2 * M_PI * u[1];
                    x[1] = dh * std::cos(w);
                    x[2] = dh * std::sin(w);
                }
                for (std::size_t a = s.N - s.k; a < s.N; ++a)
                    x[a] = 0.8 * s.patch_half_width * (2 * u[2] - 1);
                out.push_back(x);
                break;
            }
            case ScenarioKind::BallEquator: {
                const double lat = (u[1] < 0.5 ? -1 : 1) * dh;
                const double phi = 2 * M_PI * u[2];
                Vec h{std::cos(lat) * std::cos(phi), std::cos(lat) * std::sin(phi), std::sin(lat)};
                out.push_back((1.0 - d) * h);
                break;
            }
            case ScenarioKind::ParametricCurveOnSphere: {
                FermiChart chart = make_chart(s, 2 * M_PI * u[2]);
                Vec y{d, (u[1] < 0.5 ? -1 : 1) * dh, 0.0};
                out.push_back(chart.map(y));
                break;
            }
        }
    }
    return out;
}

/// Richardson-extrapolated residual check of the four distance expansions
/// over an explicit point list; points are grouped to the nearest rung of
/// the given ladder for the constant fits.
inline ExpansionReport check_distance_expansions(const Scenario& s, std::span<const Vec> points,
                                                 std::span<const double> ladder) {
    ExpansionReport rep;
    rep.rungs.assign(ladder.begin(), ladder.end());
    std::array<std::vector<double>, 4> acc;  // residual sums per rung
    std::vector<int> counts(ladder.size(), 0);
    for (auto& a : acc) a.assign(ladder.size(), 0.0);

    Field f_dt = [&](const Vec& x) { return s.delta_tilde(x); };
    Field f_d = [&](const Vec& x) { return s.dist_boundary(x); };

    const double m1 = double(s.N - s.k - 1);

    for (const Vec& x : points) {
        ExpansionSample sm;
        sm.x = x;
        try {
            CollarPoint cp = eval_collar_point(s, x);
            if (cp.singular) {
                sm.excluded = true;
                sm.reason = "on the submanifold";
                rep.samples.push_back(sm);
                continue;
            }
            sm.delta_tilde = cp.delta_tilde;
            const double h = fd_step_geometry(cp.delta_tilde);
            if (cp.delta_tilde < 10 * h) {
                sm.excluded = true;
                sm.reason = "delta_tilde below 10*h_fd";
                rep.samples.push_back(sm);
                continue;
            }
            Vec gdt = gradient_fd(f_dt, x, h);
            Vec gd = gradient_fd(f_d, x, h);
            const double lap_dt = laplacian_fd(f_dt, x, h).value;
            const double dt = cp.delta_tilde;
            sm.r[0] = std::abs(cp.delta * cp.delta / (dt * dt) - 1.0) / dt;
            sm.r[1] = std::abs(dot(gdt, gd) - cp.d / dt);
            sm.r[2] = std::abs(norm(gdt) - 1.0) / dt;
            sm.r[3] = std::abs(lap_dt - m1 / dt);
        } catch (const OutsideDomain& e) {
            sm.excluded = true;
            sm.reason = e.what();
            rep.samples.push_back(sm);
            continue;
        } catch (const OutsideCollar& e) {
            sm.excluded = true;
            sm.reason = e.what();
            rep.samples.push_back(sm);
            continue;
        }
        // nearest rung
        std::size_t best = 0;
        double bd = 1e300;
        for (std::size_t j = 0; j < rep.rungs.size(); ++j) {
            const double dd = std::abs(std::log(sm.delta_tilde / rep.rungs[j]));
            if (dd < bd) { bd = dd; best = j; }
        }
        for (int i = 0; i < 4; ++i) acc[i][best] += sm.r[i];
        counts[best]++;
        rep.samples.push_back(sm);
    }

    for (int i = 0; i < 4; ++i) {
        rep.fitted[i].assign(rep.rungs.size(), 0.0);
        double lo = 1e300, hi = 0;
        for (std::size_t j = 0; j < rep.rungs.size(); ++j) {
            if (counts[j] > 0) rep.fitted[i][j] = acc[i][j] / counts[j];
            if (counts[j] > 0) {
                lo = std::min(lo, rep.fitted[i][j]);
                hi = std::max(hi, rep.fitted[i][j]);
            }
        }
        rep.fit_ratio[i] = (lo > 0 && lo < 1e300) ? hi / lo : 0.0;
    }
    return rep;
}

/// Ladder-driven convenience wrapper: n samples at every rung.
inline ExpansionReport check_distance_expansions(const Scenario& s,
                                                 std::span<const double> ladder,
                                                 int samples_per_rung, std::uint64_t seed = 0) {
    std::vector<Vec> pts;
    for (double rung : ladder) {
        auto batch = collar_samples_at(s, rung, samples_per_rung, seed);
        pts.insert(pts.end(), batch.begin(), batch.end());
    }
    return check_distance_expansions(s, pts, ladder);
}

}  // namespace hardy
