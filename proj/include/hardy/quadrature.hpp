#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace hardy {

namespace detail {

// Gauss 7 / Kronrod 15 nodes and weights on [-1,1].
inline constexpr std::array<std::array<double, 3>, 8> kG7K15{{
    // node, gauss weight, kronrod weight
    {0.000000000000000, 0.417959183673469, 0.209482141084728},
    {0.405845151377397, 0.381830050505119, 0.190350578064785},
    {0.741531185599394, 0.279705391489277, 0.140653259715525},
    {0.949107912342759, 0.129484966168870, 0.063092092629979},
    {0.207784955007898, 0.0, 0.204432940075298},
    {0.586087235467691, 0.0, 0.169004726639267},
    {0.864864423359769, 0.0, 0.104790010322250},
    {0.991455371120813, 0.0, 0.022935322010529},
}};

}  // namespace detail

/// One Gauss-Kronrod panel; err is the usual scaled |G7 - K15| estimate.
template <class F>
double quad_g7k15(F&& f, double a, double b, double& err) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    const double f0 = f(mid);
    double g = detail::kG7K15[0][1] * f0;
    double k = detail::kG7K15[0][2] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * detail::kG7K15[i][0];
        const double fi = f(mid + dx) + f(mid - dx);
        g += detail::kG7K15[i][1] * fi;
        k += detail::kG7K15[i][2] * fi;
    }
    g *= half;
    k *= half;
    err = std::pow(200.0 * std::abs(g - k), 1.5);
    return k;
}

struct QuadResult {
    double value = 0;
    double error = 0;
    int panels = 0;
    bool converged = true;
};

/// Adaptive subdivision with a deterministic worst-first schedule (heap
/// keyed by error with interval-start tie-break). Panels are summed in
/// interval order so the value is independent of the schedule.
template <class F>
QuadResult integrate_adaptive(F&& f, double a, double b, double tol, int max_panels = 8000) {
    struct Panel {
        double a, b, value, error;
        bool operator<(const Panel& o) const {
            return error != o.error ? error < o.error : a > o.a;
        }
    };
    std::vector<Panel> heap;  // max-heap on error
    auto push = [&](Panel p) {
        heap.push_back(p);
        std::push_heap(heap.begin(), heap.end());
    };
    double err0;
    const double v0 = quad_g7k15(f, a, b, err0);
    push({a, b, v0, err0});
    double total_err = err0;

    while (int(heap.size()) < max_panels && total_err > tol) {
        std::pop_heap(heap.begin(), heap.end());
        Panel p = heap.back();
        heap.pop_back();
        if ((p.b - p.a) < 1e-14 * (b - a) || p.error == 0.0) {
            // cannot usefully split further; freeze it with zeroed error so
            // the loop moves on
            total_err -= p.error;
            p.error = 0.0;
            push(p);
            continue;
        }
        const double m = 0.5 * (p.a + p.b);
        double e1, e2;
        const double v1 = quad_g7k15(f, p.a, m, e1);
        const double v2 = quad_g7k15(f, m, p.b, e2);
        total_err += e1 + e2 - p.error;
        push({p.a, m, v1, e1});
        push({m, p.b, v2, e2});
    }

    std::sort(heap.begin(), heap.end(),
              [](const Panel& x, const Panel& y) { return x.a < y.a; });
    QuadResult r;
    r.panels = int(heap.size());
    for (const auto& p : heap) {
        r.value += p.value;
        r.error += p.error;
    }
    r.converged = r.error <= tol;
    return r;
}

/// Adaptive integral of f over (0, b) where f may carry an integrable
/// power singularity at 0: substitutes r = b t^pow to flatten it.
template <class F>
QuadResult integrate_singular_endpoint(F&& f, double b, double tol, double pow_sub = 8.0,
                                       int max_panels = 4000) {
    auto g = [&](double t) {
        const double r = b * std::pow(t, pow_sub);
        return f(r) * b * pow_sub * std::pow(t, pow_sub - 1.0);
    };
    return integrate_adaptive(g, 0.0, 1.0, tol, max_panels);
}

/// Gauss-Legendre nodes/weights on [-1,1] for the per-cell singular masses.
inline void gauss_legendre(int order, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.resize(order);
    weights.resize(order);
    for (int i = 0; i < order; ++i) {
        // Newton on Legendre polynomials from the Chebyshev initial guess
        double x = std::cos(M_PI * (i + 0.75) / (order + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= order; ++j) {
                const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            const double dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= order; ++j) {
            const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        const double dp = order * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

}  // namespace hardy
