#pragma once

#include "spraylab/grid.hpp"

namespace spray {

// Free-space convolution with the logarithmic kernel on a cell-centered grid:
//   psi(x_i)      = h^2 sum_j g(x_i - x_j) mu(x_j)
//   grad psi(x_i) = h^2 sum_j grad g(x_i - x_j) mu(x_j)
// evaluated exactly (up to FFT roundoff) through a cyclic convolution on a
// 2x zero-padded domain with a precomputed kernel table. The singular cell
// of the g table holds the exact cell average of g; the grad g table is zero
// there by odd symmetry.
//
// The result equals the free-space sum on the whole box provided mu carries
// no mass near the box edge. Intended usage keeps supp mu inside
// [-L/2, L/2]^2; solve() enforces the weaker hard precondition that the
// 2h-wide boundary band holds no sample above boundary_mass_rel * max|mu|,
// and throws SupportViolation otherwise.
//
// Instances hold FFTW plans and scratch buffers: not copyable, and a single
// instance must not be used from two threads at once. Independent runs own
// independent solvers; plan creation serializes on detail::fftw_plan_mutex().
class PoissonSolver {
public:
    explicit PoissonSolver(const Grid& grid, double boundary_mass_rel = 1e-12);
    ~PoissonSolver();
    PoissonSolver(const PoissonSolver&) = delete;
    PoissonSolver& operator=(const PoissonSolver&) = delete;

    struct Solution {
        GridField psi;   // scalar, empty when not requested
        GridField grad;  // two components (d/dx, d/dy), empty when not requested
    };

    Solution solve(const GridField& mu, bool want_psi = true, bool want_grad = true);

    const Grid& grid() const { return grid_; }

private:
    struct Impl;
    Grid grid_;
    double boundary_mass_rel_;
    Impl* impl_;
};

} // namespace spray
