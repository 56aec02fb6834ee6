#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hardy/assembly.hpp"
#include "hardy/sparse.hpp"

namespace hardy {

/// One eigen-solve of the pencil (A - lambda B_eta) u = mu B_q u.
struct MuResult {
    double lambda = 0;
    double mu = 0;
    std::vector<double> eigvec;
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
    std::string grid_signature;
    bool converged = false;
    std::string message;
};

namespace detail {

struct PencilOp {
    const SparseOperator* A;
    const std::vector<double>* beta_diag;  // may be null
    const std::vector<double>* bq_diag;
    double lambda = 0;
    double sigma = 0;

    void apply(std::span<const double> x, std::span<double> y) const {
        A->matvec(x, y);
        const std::size_t n = x.size();
        if (beta_diag != nullptr && lambda != 0.0)
            for (std::size_t i = 0; i < n; ++i) y[i] -= lambda * (*beta_diag)[i] * x[i];
        if (sigma != 0.0)
            for (std::size_t i = 0; i < n; ++i) y[i] -= sigma * (*bq_diag)[i] * x[i];
    }
};

struct CgOutcome {
    bool converged = false;
    bool indefinite = false;
    int iterations = 0;
    double rel_residual = 0;
};

/// Diagonally preconditioned CG with negative-curvature detection.
/// Reductions run in fixed index order for bit-reproducible curves.
inline CgOutcome cg_solve(const PencilOp& op, std::span<const double> precond_inv,
                          std::span<const double> rhs, std::span<double> x, double rel_tol,
                          int max_iter) {
    const std::size_t n = rhs.size();
    std::vector<double> r(n), z(n), p(n), Ap(n);
    op.apply(x, Ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - Ap[i];
    const double rhs_norm = norm2(rhs);
    CgOutcome out;
    if (!(rhs_norm > 0)) {
        out.converged = true;
        return out;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = precond_inv[i] * r[i];
    p = z;
    double rz = dot(r, z);
    for (int it = 0; it < max_iter; ++it) {
        op.apply(p, Ap);
        const double pAp = dot(p, Ap);
        if (!(pAp > 0)) {
            out.indefinite = true;
            out.iterations = it;
            return out;
        }
        const double alpha = rz / pAp;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        out.iterations = it + 1;
        out.rel_residual = norm2(r) / rhs_norm;
        if (out.rel_residual <= rel_tol) {
            out.converged = true;
            return out;
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = precond_inv[i] * r[i];
        const double rz_new = dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    return out;
}

}  // namespace detail

/// Smallest eigenvalue of (A - lambda B_eta) u = mu B_q u by shift-and-invert
/// inverse iteration: the shift sits below the current Rayleigh estimate, the
/// inner solves are CG with diagonal preconditioning, and the start vector is
/// the all-ones interior vector (B_q-normalized) unless a warm start is given.
inline MuResult min_rayleigh(const SparseOperator& A, const SparseOperator& B_q,
                             const SparseOperator* B_eta, double lambda, double tol, int max_iter,
                             const std::vector<double>* warm_start = nullptr) {
    const std::size_t n = A.dim();
    if (B_q.dim() != n || (B_eta != nullptr && B_eta->dim() != n))
        throw std::invalid_argument("min_rayleigh: operator dimensions differ");
    if (!(tol > 0)) throw std::invalid_argument("min_rayleigh: tol must be positive");

    MuResult res;
    res.lambda = lambda;

    std::vector<double> bq = B_q.diagonal();
    std::vector<double> be;
    if (B_eta != nullptr) be = B_eta->diagonal();
    for (double v : bq)
        if (!(v > 0)) throw std::domain_error("min_rayleigh: B_q must have positive diagonal");

    std::vector<double> u(n, 1.0);
    if (warm_start != nullptr && warm_start->size() == n) u = *warm_start;

    auto bq_normalize = [&](std::vector<double>& v) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += bq[i] * v[i] * v[i];
        s = std::sqrt(s);
        for (auto& x : v) x /= s;
        return s;
    };
    bq_normalize(u);

    std::vector<double> Au(n), work(n);
    auto rayleigh_and_residual = [&](const std::vector<double>& v, double& mu, double& rr) {
        A.matvec(v, Au);
        if (B_eta != nullptr && lambda != 0.0) {
            B_eta->matvec(v, work);
            for (std::size_t i = 0; i < n; ++i) Au[i] -= lambda * work[i];
        }
        double num = dot(Au, v), den = 0;
        for (std::size_t i = 0; i < n; ++i) den += bq[i] * v[i] * v[i];
        mu = num / den;
        double rnorm = 0, bnorm = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ri = Au[i] - mu * bq[i] * v[i];
            rnorm += ri * ri;
            bnorm += bq[i] * v[i] * bq[i] * v[i];
        }
        rr = std::sqrt(rnorm) / std::sqrt(bnorm);
    };

    double mu, rr;
    rayleigh_and_residual(u, mu, rr);
    if (rr <= tol) {
        res.mu = mu;
        res.residual = rr;
        res.eigvec = std::move(u);
        res.iterations = 1;
        res.converged = true;
        return res;
    }

    detail::PencilOp op{&A, B_eta != nullptr ? &be : nullptr, &bq, lambda, 0.0};
    std::vector<double> adiag = A.diagonal();
    std::vector<double> precond(n), rhs(n), z(n);

    const int cg_cap = std::max(500, int(4 * std::sqrt(double(n)) + 200));
    for (int outer = 1; outer <= max_iter; ++outer) {
        res.iterations = outer;
        double sigma = mu - 0.1 * std::max(std::abs(mu), 1e-2);
        bool solved = false;
        for (int retry = 0; retry <= 5 && !solved; ++retry) {
            op.sigma = sigma;
            for (std::size_t i = 0; i < n; ++i) {
                double d = adiag[i] - sigma * bq[i];
                if (op.beta_diag != nullptr) d -= lambda * be[i];
                precond[i] = d > 0 ? 1.0 / d : 1.0;
            }
            for (std::size_t i = 0; i < n; ++i) rhs[i] = bq[i] * u[i];
            z = u;  // warm inner start from the current iterate
            const double inner_tol = std::min(1e-2, std::max(0.05 * rr, 0.01 * tol));
            auto cg = detail::cg_solve(op, precond, rhs, z, inner_tol, cg_cap);
            if (cg.indefinite) {
                sigma -= (1 << retry) * std::max(std::abs(sigma), 1.0);
                continue;
            }
            if (!cg.converged && cg.rel_residual > 0.5) {
                res.message = "inner CG stagnated (relative residual " +
                              std::to_string(cg.rel_residual) + ")";
                res.mu = mu;
                res.residual = rr;
                res.eigvec = std::move(u);
                return res;
            }
            solved = true;
        }
        if (!solved) {
            res.message = "shifted operator stayed indefinite after retries";
            res.mu = mu;
            res.residual = rr;
            res.eigvec = std::move(u);
            return res;
        }
        u = z;
        bq_normalize(u);
        rayleigh_and_residual(u, mu, rr);
        if (rr <= tol) {
            res.converged = true;
            break;
        }
    }
    res.mu = mu;
    res.residual = rr;
    res.eigvec = std::move(u);
    if (!res.converged && res.message.empty())
        res.message = "inverse iteration reached max_iter";
    return res;
}

/// Monotonicity / concavity audit flags for a computed mu curve.
struct MuCurve {
    std::vector<MuResult> points;
    bool nonincreasing = true;
    bool concave = true;
    double worst_monotonicity_gap = 0;  // max positive jump mu(l2) - mu(l1)
    double worst_concavity_gap = 0;
};

/// Solves along a sorted lambda list with warm-started eigenvectors and
/// audits that the results are nonincreasing (exact discrete property) and
/// concave within solver tolerance.
inline MuCurve mu_curve(const SparseOperator& A, const SparseOperator& B_q,
                        const SparseOperator* B_eta, std::span<const double> lambdas, double tol,
                        int max_iter, const std::string& grid_signature = "") {
    MuCurve curve;
    const std::vector<double>* warm = nullptr;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (i > 0 && !(lambdas[i] >= lambdas[i - 1]))
            throw std::invalid_argument("mu_curve: lambda list must be sorted");
        MuResult r = min_rayleigh(A, B_q, B_eta, lambdas[i], tol, max_iter, warm);
        r.grid_signature = grid_signature;
        curve.points.push_back(std::move(r));
        warm = &curve.points.back().eigvec;
    }
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const double jump = curve.points[i].mu - curve.points[i - 1].mu;
        const double slack = 1e-9 * std::max(1.0, std::abs(curve.points[i].mu));
        curve.worst_monotonicity_gap = std::max(curve.worst_monotonicity_gap, jump);
        if (jump > slack) curve.nonincreasing = false;
    }
    for (std::size_t i = 1; i + 1 < curve.points.size(); ++i) {
        // midpoint concavity on consecutive triples with matching spacing
        const double l0 = curve.points[i - 1].lambda, l1 = curve.points[i].lambda,
                     l2 = curve.points[i + 1].lambda;
        if (std::abs((l1 - l0) - (l2 - l1)) > 1e-12 * std::max(1.0, std::abs(l2 - l0))) continue;
        const double gap =
            0.5 * (curve.points[i - 1].mu + curve.points[i + 1].mu) - curve.points[i].mu;
        curve.worst_concavity_gap = std::max(curve.worst_concavity_gap, gap);
        if (gap > 1e-6) curve.concave = false;
    }
    return curve;
}

/// The threshold bracket: mu(lambda_lo) sits on the discrete plateau,
/// mu(lambda_hi) below it, lambda_hi - lambda_lo <= the requested width.
struct ThresholdResult {
    double lambda_lo = 0;
    double lambda_hi = 0;
    double plateau = 0;         // (N-k)^2 / 4
    double tol_mu = 0;          // plateau tolerance tied to the discretization
    MuResult evidence_lo, evidence_hi;
    std::string grid_coarse, grid_fine;
    bool certified = false;
    std::string message;
};

/// Doubling search plus bisection for lambda*. The plateau tolerance is
/// estimated first by comparing mu at lambda = 0 on the two grids
/// (tol_mu = max(2 |mu_c - mu_f|, 1e-3)); the search walks down from 0
/// until the plateau is seen and up until it is left, then bisects.
struct ThresholdProblem {
    const SparseOperator* A_coarse;
    const SparseOperator* Bq_coarse;
    const SparseOperator* Beta_coarse;
    const SparseOperator* A_fine;
    const SparseOperator* Bq_fine;
    const SparseOperator* Beta_fine;
    double plateau;
    std::string sig_coarse, sig_fine;
};

inline ThresholdResult find_threshold(const ThresholdProblem& pb, double width_tol, double tol,
                                      int max_iter) {
    ThresholdResult out;
    out.plateau = pb.plateau;
    out.grid_coarse = pb.sig_coarse;
    out.grid_fine = pb.sig_fine;

    MuResult mc = min_rayleigh(*pb.A_coarse, *pb.Bq_coarse, pb.Beta_coarse, 0.0, tol, max_iter);
    MuResult mf = min_rayleigh(*pb.A_fine, *pb.Bq_fine, pb.Beta_fine, 0.0, tol, max_iter);
    out.tol_mu = std::max(2.0 * std::abs(mc.mu - mf.mu), 1e-3);
    const double cutoff = pb.plateau - out.tol_mu;

    const std::vector<double>* warm = nullptr;
    std::vector<MuResult> cache;
    auto solve_at = [&](double lam) -> const MuResult& {
        MuResult r = min_rayleigh(*pb.A_fine, *pb.Bq_fine, pb.Beta_fine, lam, tol, max_iter, warm);
        r.grid_signature = pb.sig_fine;
        cache.push_back(std::move(r));
        warm = &cache.back().eigvec;
        return cache.back();
    };

    // walk down for a plateau point
    double lo = 0;
    MuResult ev_lo;
    {
        double lam = 0, step = 1;
        bool found = false;
        while (lam >= -1e6) {
            const MuResult& r = solve_at(lam);
            if (r.mu >= cutoff) {
                lo = lam;
                ev_lo = r;
                found = true;
                break;
            }
            lam -= step;
            step *= 2;
        }
        if (!found) {
            out.message = "plateau not certified at this resolution";
            return out;
        }
    }
    // walk up for a below-plateau point
    double hi = lo;
    MuResult ev_hi;
    {
        double step = 1;
        double lam = lo + step;
        bool found = false;
        while (lam <= 1e6) {
            const MuResult& r = solve_at(lam);
            if (r.mu < cutoff) {
                hi = lam;
                ev_hi = r;
                found = true;
                break;
            }
            lo = lam;
            ev_lo = r;
            step *= 2;
            lam = lo + step;
        }
        if (!found) {
            out.message = "no descent below the plateau found";
            return out;
        }
    }
    while (hi - lo > width_tol) {
        const double mid = 0.5 * (lo + hi);
        const MuResult& r = solve_at(mid);
        if (r.mu >= cutoff) {
            lo = mid;
            ev_lo = r;
        } else {
            hi = mid;
            ev_hi = r;
        }
    }
    out.lambda_lo = lo;
    out.lambda_hi = hi;
    out.evidence_lo = std::move(ev_lo);
    out.evidence_hi = std::move(ev_hi);
    out.certified = true;
    return out;
}

/// Discrete constant of the local improved Hardy inequality on the collar:
/// the minimum of (u'Au - plateau u'B_q u) / (u'B_log u) over the collar
/// grid. Positive by the lemma; conforming refinement can only lower it.
inline MuResult local_hardy_check(const SparseOperator& A, const SparseOperator& B_q,
                                  const SparseOperator& B_log, double plateau, double tol,
                                  int max_iter) {
    SparseOperator shifted = shift_by_diagonal(A, B_q, plateau);
    return min_rayleigh(shifted, B_log, nullptr, 0.0, tol, max_iter);
}

}  // namespace hardy
