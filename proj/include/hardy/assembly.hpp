#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "hardy/grid.hpp"
#include "hardy/quadrature.hpp"
#include "hardy/sparse.hpp"
#include "hardy/weights.hpp"

namespace hardy {

enum class MassMode { Q, Eta, Log, Plain };

namespace detail {

inline double dual_length(const std::vector<double>& ax, std::size_t i) {
    const double lo = i == 0 ? ax[0] : 0.5 * (ax[i - 1] + ax[i]);
    const double hi = i + 1 == ax.size() ? ax.back() : 0.5 * (ax[i] + ax[i + 1]);
    return hi - lo;
}

}  // namespace detail

/// Two-point-flux finite-volume discretization of int p grad(u).grad(v):
/// symmetric, M-matrix on uniform sub-grids, Dirichlet rows and columns
/// eliminated.
inline SparseOperator assemble_stiffness(const GradedGrid& g, const ScalarField& p) {
    const std::size_t N = g.dims.size();
    std::vector<Triplet> trips;
    std::vector<std::size_t> idx(N, 0);

    // iterate all nodes; for each axis connect to the +1 neighbor
    std::size_t total = 1;
    for (auto d : g.dims) total *= d;
    for (std::size_t f = 0; f < total; ++f) {
        for (std::size_t a = 0; a < N; ++a) idx[a] = (f / g.strides[a]) % g.dims[a];
        for (std::size_t a = 0; a < N; ++a) {
            if (idx[a] + 1 >= g.dims[a]) continue;
            const std::size_t fn = f + g.strides[a];
            const int iu = g.interior[f], iv = g.interior[fn];
            if (iu < 0 && iv < 0) continue;
            const double h = g.axis_nodes[a][idx[a] + 1] - g.axis_nodes[a][idx[a]];
            double area = 1.0;
            for (std::size_t b = 0; b < N; ++b)
                if (b != a) area *= detail::dual_length(g.axis_nodes[b], idx[b]);
            Vec mid = g.node_point(f);
            mid[a] += 0.5 * h;
            const double c = p(mid) * area / h;
            if (iu >= 0) trips.push_back({std::size_t(iu), std::size_t(iu), c});
            if (iv >= 0) trips.push_back({std::size_t(iv), std::size_t(iv), c});
            if (iu >= 0 && iv >= 0) {
                trips.push_back({std::size_t(iu), std::size_t(iv), -c});
                trips.push_back({std::size_t(iv), std::size_t(iu), -c});
            }
        }
    }
    return SparseOperator(g.n_interior(), std::move(trips));
}

namespace detail {

struct MassAssembler {
    const GradedGrid& g;
    const ScalarField& w;
    MassMode mode;
    std::vector<double> gn_far, gw_far, gn_near, gw_near;
    std::vector<double> cell_lo, cell_hi;  // current grid cell bounds
    std::size_t corner0 = 0;
    std::vector<double>* diag = nullptr;

    double kernel_at(const Vec& x) const {
        switch (mode) {
            case MassMode::Plain:
                return 1.0;
            case MassMode::Q:
            case MassMode::Eta: {
                const double d = g.scenario.dist_sigma_fast(x);
                return 1.0 / (d * d);
            }
            case MassMode::Log: {
                const double d = g.scenario.dist_sigma_fast(x);
                if (!(d < 1.0))
                    throw std::domain_error(
                        "assemble_singular_mass: log mode needs delta < 1 (collar grids)");
                const double l = std::log(d);
                return 1.0 / (d * d * l * l);
            }
        }
        return 0.0;
    }

    /// Tensor Gauss over [lo, hi], hat weights measured in the grid cell.
    void gauss_box(std::span<const double> lo, std::span<const double> hi, bool near) {
        const std::size_t N = g.dims.size();
        const auto& gn = near ? gn_near : gn_far;
        const auto& gw = near ? gw_near : gw_far;
        const std::size_t q = gn.size();
        std::size_t n_q = 1;
        for (std::size_t a = 0; a < N; ++a) n_q *= q;
        for (std::size_t iq = 0; iq < n_q; ++iq) {
            std::size_t rq = iq;
            Vec x(g.scenario.N);
            double wt = 1.0;
            std::array<double, kMaxDim> tloc{};
            for (std::size_t a = 0; a < N; ++a) {
                const std::size_t j = rq % q;
                rq /= q;
                const double t = 0.5 * (gn[j] + 1.0);
                x[a] = lo[a] + (hi[a] - lo[a]) * t;
                wt *= gw[j] * 0.5 * (hi[a] - lo[a]);
                tloc[a] = (x[a] - cell_lo[a]) / (cell_hi[a] - cell_lo[a]);
            }
            const double val = w(x) * kernel_at(x) * wt;
            if (!std::isfinite(val))
                throw std::runtime_error("assemble_singular_mass: non-finite quadrature value");
            for (std::size_t m = 0; m < (1u << N); ++m) {
                std::size_t fc = corner0;
                double hat = 1.0;
                for (std::size_t a = 0; a < N; ++a) {
                    if (m & (1u << a)) {
                        fc += g.strides[a];
                        hat *= tloc[a];
                    } else {
                        hat *= 1.0 - tloc[a];
                    }
                }
                const int ii = g.interior[fc];
                if (ii >= 0) (*diag)[std::size_t(ii)] += val * hat;
            }
        }
    }

    /// Recursive geometric refinement toward the singular set: a box whose
    /// distance to Sigma is comparable to its diameter is bisected along its
    /// longest axis; smooth boxes use plain Gauss. The far half terminates
    /// quickly, so the tree stays shallow. Depth is capped, the residual
    /// core being integrable of codimension >= 2.
    void integrate_box(std::vector<double> lo, std::vector<double> hi, int depth) {
        const std::size_t N = g.dims.size();
        double dmin = 1e300;
        for (std::size_t m = 0; m < (1u << N); ++m) {
            Vec corner(g.scenario.N);
            for (std::size_t a = 0; a < N; ++a) corner[a] = (m & (1u << a)) ? hi[a] : lo[a];
            dmin = std::min(dmin, g.scenario.dist_sigma_fast(corner));
        }
        // the split direction is the axis along which delta actually moves
        // (first plus second center difference); splitting tangent axes
        // would branch exponentially without resolving anything
        Vec c(g.scenario.N);
        for (std::size_t a = 0; a < N; ++a) c[a] = 0.5 * (lo[a] + hi[a]);
        const double dc = g.scenario.dist_sigma_fast(c);
        double best_score = 0, max_var = 0;
        std::size_t split_axis = 0;
        for (std::size_t a = 0; a < N; ++a) {
            Vec cp = c, cm = c;
            cp[a] = 0.5 * (c[a] + hi[a]);
            cm[a] = 0.5 * (c[a] + lo[a]);
            const double dp = g.scenario.dist_sigma_fast(cp), dm = g.scenario.dist_sigma_fast(cm);
            const double score = std::abs(dp - dm) + std::abs(dp + dm - 2 * dc);
            max_var = std::max(max_var, score);
            if (score > best_score) {
                best_score = score;
                split_axis = a;
            }
        }
        const bool smooth = dmin > 3.0 * max_var;  // kernel varies mildly across the box
        if (mode == MassMode::Plain || smooth || depth >= 21 || best_score == 0.0) {
            gauss_box(lo, hi, depth > 0);
            return;
        }
        const double mid = 0.5 * (lo[split_axis] + hi[split_axis]);
        std::vector<double> chi = hi, clo = lo;
        chi[split_axis] = mid;
        clo[split_axis] = mid;
        integrate_box(lo, chi, depth + 1);
        integrate_box(clo, hi, depth + 1);
    }
};

}  // namespace detail

/// Lumped (diagonal) mass with entries int w * kernel * hat_i, accumulated
/// cell by cell (row-sum lumping). Gauss nodes are strictly interior so
/// delta > 0 at every quadrature point. Sigma-adjacent cells are refined
/// geometrically toward the singular set before quadrature; far cells use
/// plain tensor Gauss of order `order_far`.
inline SparseOperator assemble_singular_mass(const GradedGrid& g, const ScalarField& w,
                                             MassMode mode, int order_far = 4,
                                             int order_near = 8) {
    const std::size_t N = g.dims.size();
    detail::MassAssembler asmbl{g, w, mode, {}, {}, {}, {}, {}, {}, 0, nullptr};
    gauss_legendre(order_far, asmbl.gn_far, asmbl.gw_far);
    gauss_legendre(order_near, asmbl.gn_near, asmbl.gw_near);

    std::vector<double> diag(g.n_interior(), 0.0);
    asmbl.diag = &diag;
    std::vector<std::size_t> cidx(N, 0), dims_cells(N);
    std::size_t n_cells = 1;
    for (std::size_t a = 0; a < N; ++a) {
        dims_cells[a] = g.dims[a] - 1;
        n_cells *= dims_cells[a];
    }

    for (std::size_t c = 0; c < n_cells; ++c) {
        std::size_t rem = c;
        for (std::size_t a = 0; a < N; ++a) {
            cidx[a] = rem % dims_cells[a];
            rem /= dims_cells[a];
        }
        bool any_interior = false;
        std::size_t corner0 = 0;
        for (std::size_t a = 0; a < N; ++a) corner0 += cidx[a] * g.strides[a];
        for (std::size_t m = 0; m < (1u << N); ++m) {
            std::size_t fc = corner0;
            for (std::size_t a = 0; a < N; ++a)
                if (m & (1u << a)) fc += g.strides[a];
            if (g.interior[fc] >= 0) any_interior = true;
        }
        if (!any_interior) continue;

        asmbl.cell_lo.assign(N, 0.0);
        asmbl.cell_hi.assign(N, 0.0);
        for (std::size_t a = 0; a < N; ++a) {
            asmbl.cell_lo[a] = g.axis_nodes[a][cidx[a]];
            asmbl.cell_hi[a] = g.axis_nodes[a][cidx[a] + 1];
        }
        asmbl.corner0 = corner0;
        asmbl.integrate_box(asmbl.cell_lo, asmbl.cell_hi, 0);
    }

    std::vector<Triplet> trips;
    trips.reserve(diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) trips.push_back({i, i, diag[i]});
    return SparseOperator(g.n_interior(), std::move(trips));
}

/// (u' A u - lambda u' B_eta u) / (u' B_q u); B_eta may be null.
inline double rayleigh_quotient(const SparseOperator& A, const SparseOperator& B_q,
                                const SparseOperator* B_eta, double lambda,
                                std::span<const double> u) {
    double un = 0;
    for (double v : u) un += v * v;
    if (!(un > 0)) throw std::invalid_argument("rayleigh_quotient: u must be nonzero");
    const double den = B_q.quadratic_form(u);
    if (!(den > 0)) throw std::domain_error("rayleigh_quotient: B_q form vanished");
    double num = A.quadratic_form(u);
    if (B_eta != nullptr && lambda != 0.0) num -= lambda * B_eta->quadratic_form(u);
    return num / den;
}

/// A - c * diag(B): used to fold potentials and plateau shifts into the
/// stiffness before an eigensolve.
inline SparseOperator shift_by_diagonal(const SparseOperator& A, const SparseOperator& B,
                                        double c) {
    std::vector<Triplet> trips = A.triplets();
    std::vector<double> d = B.diagonal();
    for (std::size_t i = 0; i < d.size(); ++i) trips.push_back({i, i, -c * d[i]});
    return SparseOperator(A.dim(), std::move(trips));
}

}  // namespace hardy
