#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include "hardy/core.hpp"

namespace hardy {

/// Scalar field on ambient points.
using Field = std::function<double(const Vec&)>;

/// Step choice for geometry checks: h = 1e-3 * max(delta_tilde, 1e-2),
/// balancing truncation against cancellation near the singular set.
inline double fd_step_geometry(double delta_tilde) {
    return 1e-3 * std::max(delta_tilde, 1e-2);
}

/// Step choice for collar constructions, which vary on the scale of
/// delta_tilde itself. Satisfies h <= delta_tilde / 10.
inline double fd_step_collar(double delta_tilde) { return 1e-3 * delta_tilde; }

/// Central-difference gradient with one Richardson level. The actually
/// representable offsets (x + h) - x and x - (x - h) are used in the
/// difference formulas: near |x| ~ 1 the nominal h is contaminated by
/// ulp-level rounding that the singular fields amplify.
inline Vec gradient_fd(const Field& f, const Vec& x, double h) {
    if (!(h > 0)) throw std::invalid_argument("gradient_fd: h must be positive");
    Vec g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto central = [&](double step) {
            Vec xp = x, xm = x;
            xp[i] = x[i] + step;
            xm[i] = x[i] - step;
            const double hp = xp[i] - x[i];  // exact
            const double hm = x[i] - xm[i];  // exact
            const double fp = f(xp), fm = f(xm), fc = f(x);
            // first derivative on an uneven 3-point stencil
            return (fp * hm * hm - fm * hp * hp + fc * (hp * hp - hm * hm)) /
                   (hp * hm * (hp + hm));
        };
        const double d1 = central(h), d2 = central(h / 2);
        g[i] = (4 * d2 - d1) / 3;
    }
    return g;
}

struct LaplacianResult {
    double value = 0;
    double error_estimate = 0;  // difference of the two Richardson levels / 3
};

/// Second-order central Laplacian with one Richardson extrapolation level
/// and an error estimate from the level difference. Uses the exact
/// representable offsets per axis (uneven-stencil correction).
inline LaplacianResult laplacian_fd(const Field& f, const Vec& x, double h) {
    if (!(h > 0)) throw std::invalid_argument("laplacian_fd: h must be positive");
    const double fc = f(x);
    auto lap = [&](double step) {
        double s = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            Vec xp = x, xm = x;
            xp[i] = x[i] + step;
            xm[i] = x[i] - step;
            const double hp = xp[i] - x[i];
            const double hm = x[i] - xm[i];
            const double fp = f(xp), fm = f(xm);
            s += 2 * (fp * hm + fm * hp - fc * (hp + hm)) / (hp * hm * (hp + hm));
        }
        return s;
    };
    const double l1 = lap(h), l2 = lap(h / 2);
    LaplacianResult r;
    r.value = (4 * l2 - l1) / 3;
    r.error_estimate = std::abs(l2 - l1) / 3;
    return r;
}

}  // namespace hardy
