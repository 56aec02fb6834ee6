#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "hardy/core.hpp"
#include "hardy/geometry.hpp"

namespace hardy {

/// Tensor-product grid graded toward Sigma_k on the transverse axes.
/// Nodes outside Omega or outside an optional collar restriction are
/// Dirichlet; the interior index map is a bijection onto the remaining
/// nodes.
struct GradedGrid {
    Scenario scenario;
    std::size_t n = 0;       // cells per axis
    double gamma = 1.0;      // grading exponent
    double collar_beta = 0;  // nonzero: restrict to the collar {delta_tilde < beta}
    std::vector<std::vector<double>> axis_nodes;  // per axis, ascending, endpoints included
    std::vector<int> interior;                    // flat node index -> interior index or -1
    std::vector<std::size_t> interior_nodes;      // interior index -> flat node index
    std::vector<std::size_t> dims;                // node count per axis
    std::vector<std::size_t> strides;

    std::size_t n_interior() const { return interior_nodes.size(); }

    std::size_t flat_index(std::span<const std::size_t> idx) const {
        std::size_t f = 0;
        for (std::size_t a = 0; a < dims.size(); ++a) f += idx[a] * strides[a];
        return f;
    }

    Vec node_point(std::size_t flat) const {
        Vec x(scenario.N);
        for (std::size_t a = 0; a < dims.size(); ++a) {
            const std::size_t ia = (flat / strides[a]) % dims[a];
            x[a] = axis_nodes[a][ia];
        }
        return x;
    }

    std::string signature() const {
        return to_string(scenario.kind) + ":n=" + std::to_string(n) +
               ":gamma=" + std::to_string(gamma) +
               (collar_beta > 0 ? ":collar=" + std::to_string(collar_beta) : "");
    }
};

namespace detail {

/// [0, L] with nodes L (j/n)^gamma, clustered at 0.
inline std::vector<double> axis_graded_zero(double L, std::size_t n, double gamma) {
    std::vector<double> v(n + 1);
    for (std::size_t j = 0; j <= n; ++j) v[j] = L * std::pow(double(j) / double(n), gamma);
    return v;
}

/// [-L, L] clustered at 0 from both sides; n is rounded up to even.
inline std::vector<double> axis_graded_center(double L, std::size_t n, double gamma) {
    const std::size_t h = (n + 1) / 2;
    std::vector<double> v;
    for (std::size_t j = h; j > 0; --j) v.push_back(-L * std::pow(double(j) / double(h), gamma));
    v.push_back(0.0);
    for (std::size_t j = 1; j <= h; ++j) v.push_back(L * std::pow(double(j) / double(h), gamma));
    return v;
}

/// [-L, L] clustered at both ends (the ball boundary).
inline std::vector<double> axis_graded_ends(double L, std::size_t n, double gamma) {
    const std::size_t h = (n + 1) / 2;
    std::vector<double> v;
    for (std::size_t j = 0; j < h; ++j)
        v.push_back(L * (std::pow(double(j) / double(h), gamma) - 1.0));
    v.push_back(0.0);
    for (std::size_t j = 1; j <= h; ++j)
        v.push_back(L * (1.0 - std::pow(1.0 - double(j) / double(h), gamma)));
    return v;
}

inline std::vector<double> axis_uniform(double lo, double hi, std::size_t n) {
    std::vector<double> v(n + 1);
    for (std::size_t j = 0; j <= n; ++j) v[j] = lo + (hi - lo) * double(j) / double(n);
    return v;
}

inline void finalize_grid(GradedGrid& g) {
    g.dims.clear();
    for (const auto& ax : g.axis_nodes) g.dims.push_back(ax.size());
    g.strides.assign(g.dims.size(), 1);
    for (std::size_t a = 1; a < g.dims.size(); ++a)
        g.strides[a] = g.strides[a - 1] * g.dims[a - 1];
    std::size_t total = 1;
    for (auto d : g.dims) total *= d;
    g.interior.assign(total, -1);
    g.interior_nodes.clear();

    for (std::size_t f = 0; f < total; ++f) {
        bool boundary = false;
        for (std::size_t a = 0; a < g.dims.size(); ++a) {
            const std::size_t ia = (f / g.strides[a]) % g.dims[a];
            if (ia == 0 || ia == g.dims[a] - 1) boundary = true;
        }
        if (boundary) continue;
        Vec x = g.node_point(f);
        if (!g.scenario.inside(x)) continue;  // staircase Dirichlet outside Omega
        if (g.collar_beta > 0 && !(g.scenario.delta_tilde(x) < g.collar_beta)) continue;
        g.interior[f] = int(g.interior_nodes.size());
        g.interior_nodes.push_back(f);
    }
}

}  // namespace detail

/// Grid over all of Omega. FlatSlab: x1 in [0,1] graded to 0, in-boundary
/// transverse axes graded to 0 from both sides, tangent axes uniform.
/// BallEquator: box [-1,1]^3 with x,y graded toward the boundary and z
/// graded toward the equator plane; outside-ball nodes are Dirichlet.
inline GradedGrid build_grid(const Scenario& s, std::size_t n, double gamma) {
    if (n < 8) throw std::invalid_argument("build_grid: need n >= 8 cells per axis");
    if (!(gamma >= 1.0 && gamma <= 4.0))
        throw std::invalid_argument("build_grid: gamma must lie in [1,4]");
    GradedGrid g;
    g.scenario = s;
    g.n = n;
    g.gamma = gamma;
    switch (s.kind) {
        case ScenarioKind::FlatSlab: {
            g.axis_nodes.push_back(detail::axis_graded_zero(1.0, n, gamma));
            for (std::size_t a = 1; a < s.N - s.k; ++a)
                g.axis_nodes.push_back(detail::axis_graded_center(1.0, n, gamma));
            for (std::size_t a = s.N - s.k; a < s.N; ++a)
                g.axis_nodes.push_back(detail::axis_uniform(-1.0, 1.0, n));
            break;
        }
        case ScenarioKind::BallEquator:
        case ScenarioKind::ParametricCurveOnSphere: {
            g.axis_nodes.push_back(detail::axis_graded_ends(1.0, n, gamma));
            g.axis_nodes.push_back(detail::axis_graded_ends(1.0, n, gamma));
            g.axis_nodes.push_back(detail::axis_graded_center(1.0, n, gamma));
            break;
        }
    }
    detail::finalize_grid(g);

    // the collar must be resolved: require >= 4 cells fully inside
    // {delta_tilde < beta} (all corners below beta)
    std::vector<std::size_t> dims_cells(g.dims.size());
    std::size_t n_cells = 1;
    for (std::size_t a = 0; a < g.dims.size(); ++a) {
        dims_cells[a] = g.dims[a] - 1;
        n_cells *= dims_cells[a];
    }
    int cells_in_collar = 0;
    for (std::size_t c = 0; c < n_cells && cells_in_collar < 4; ++c) {
        std::size_t rem = c;
        double maxd = 0;
        std::size_t corner0 = 0;
        for (std::size_t a = 0; a < g.dims.size(); ++a) {
            corner0 += (rem % dims_cells[a]) * g.strides[a];
            rem /= dims_cells[a];
        }
        bool ok = true;
        for (std::size_t m = 0; ok && m < (1u << g.dims.size()); ++m) {
            std::size_t fc = corner0;
            for (std::size_t a = 0; a < g.dims.size(); ++a)
                if (m & (1u << a)) fc += g.strides[a];
            try {
                maxd = std::max(maxd, s.delta_tilde(g.node_point(fc)));
            } catch (const OutsideDomain&) {
                ok = false;  // cut-locus corner; treat the cell as outside
            }
        }
        if (ok && maxd < s.beta) ++cells_in_collar;
    }
    if (cells_in_collar < 4)
        throw std::invalid_argument("build_grid: fewer than 4 cells resolve the collar");
    return g;
}

/// Grid over the collar Omega_beta = {delta_tilde < beta} with Dirichlet
/// conditions on the whole of its boundary (inner shell and boundary face),
/// used by the local improved-Hardy check.
inline GradedGrid build_collar_grid(const Scenario& s, double beta, std::size_t n, double gamma) {
    if (n < 8) throw std::invalid_argument("build_collar_grid: need n >= 8 cells per axis");
    GradedGrid g;
    g.scenario = s;
    g.n = n;
    g.gamma = gamma;
    g.collar_beta = beta;
    switch (s.kind) {
        case ScenarioKind::FlatSlab: {
            g.axis_nodes.push_back(detail::axis_graded_zero(beta, n, gamma));
            for (std::size_t a = 1; a < s.N - s.k; ++a)
                g.axis_nodes.push_back(detail::axis_graded_center(beta, n, gamma));
            for (std::size_t a = s.N - s.k; a < s.N; ++a)
                g.axis_nodes.push_back(
                    detail::axis_uniform(-s.patch_half_width - beta, s.patch_half_width + beta, n));
            break;
        }
        case ScenarioKind::BallEquator:
        case ScenarioKind::ParametricCurveOnSphere: {
            g.axis_nodes.push_back(detail::axis_graded_ends(1.0, n, gamma));
            g.axis_nodes.push_back(detail::axis_graded_ends(1.0, n, gamma));
            g.axis_nodes.push_back(detail::axis_graded_center(beta, n, gamma));
            break;
        }
    }
    detail::finalize_grid(g);
    if (g.n_interior() == 0)
        throw std::invalid_argument("build_collar_grid: no interior nodes resolve the collar");
    return g;
}

}  // namespace hardy
