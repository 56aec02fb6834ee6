#pragma once

#include <cmath>
#include <string>

#include "hardy/assembly.hpp"
#include "hardy/grid.hpp"
#include "hardy/solver.hpp"
#include "hardy/weights.hpp"

namespace hardy {

/// Assembled forms of the weighted quotient on one grid.
struct DiscreteProblem {
    GradedGrid grid;
    SparseOperator A;      // stiffness with p
    SparseOperator B_q;    // q delta^-2 lumped mass
    SparseOperator B_eta;  // eta delta^-2 lumped mass
    double plateau = 0;    // (N-k)^2 / 4

    std::string signature() const { return grid.signature(); }
};

inline DiscreteProblem build_problem(const Scenario& s, const WeightTriple& w, std::size_t n,
                                     double gamma) {
    DiscreteProblem p;
    p.grid = build_grid(s, n, gamma);
    p.A = assemble_stiffness(p.grid, w.p);
    p.B_q = assemble_singular_mass(p.grid, w.q, MassMode::Q);
    p.B_eta = assemble_singular_mass(p.grid, w.eta, MassMode::Eta);
    const double m = double(s.N - s.k);
    p.plateau = m * m / 4;
    return p;
}

/// Collar-restricted forms for the local improved-Hardy check:
/// A with p, B_q with q, and the log-corrected mass with unit weight.
struct CollarProblem {
    GradedGrid grid;
    SparseOperator A;
    SparseOperator B_q;
    SparseOperator B_log;
    double plateau = 0;
};

inline CollarProblem build_collar_problem(const Scenario& s, const WeightTriple& w, double beta,
                                          std::size_t n, double gamma) {
    CollarProblem p;
    p.grid = build_collar_grid(s, beta, n, gamma);
    p.A = assemble_stiffness(p.grid, w.p);
    p.B_q = assemble_singular_mass(p.grid, w.q, MassMode::Q);
    auto one = ScalarField::parse("1", s);
    p.B_log = assemble_singular_mass(p.grid, one, MassMode::Log);
    const double m = double(s.N - s.k);
    p.plateau = m * m / 4;
    return p;
}

}  // namespace hardy
