#pragma once

#include <vector>

#include "spraylab/grid.hpp"
#include "spraylab/poisson.hpp"

namespace spray {

// V = -perp(grad g * mu): the divergence-free velocity induced by the
// scalar density mu. Uses the solver's kernel-table gradient, so
// V = (d/dy psi, -d/dx psi) with psi = g * mu.
GridField velocity_from_vorticity(PoissonSolver& solver, const GridField& mu);

// Velocity of a set of regularized point masses at a single location:
//   sum_k w_k * perp(x - q_k) / (2 pi (|x - q_k|^2 + eps^2))
Vec2 blob_velocity_at(Vec2 x, const std::vector<Vec2>& q,
                      const std::vector<double>& w, double eps);

// Adds the blob velocity of every particle to each grid sample of V.
// Equal weights w for all particles. O(N n^2).
void add_blob_velocity(GridField& V, const std::vector<Vec2>& q, double w, double eps);

// For each radius r: max over sampled angles of |V(x) - m x_perp/(2 pi |x|^2)| * r^2
// where m = integrate(mu). V is interpolated bicubically from the grid, so every
// radius must stay at least 2h inside the box and outside supp mu.
std::vector<double> far_field_deficit(PoissonSolver& solver, const GridField& mu,
                                      const std::vector<double>& radii, int n_angles = 64);

// Background sweep field: total_mass times the velocity induced by the
// reference shape chi. Requires integrate(chi) = 1 within 1e-6.
GridField vbar_field(PoissonSolver& solver, double total_mass, const GridField& chi);

} // namespace spray
