#pragma once

#include "spraylab/grid.hpp"

namespace spray {

// Conservative transport tendency -div(phi u) in finite-volume flux form.
// Face velocities are two-point central averages of the cell-centered u;
// the transported quantity is reconstructed at faces with the third-order
// upwind-biased stencil (the kappa = 1/3 scheme):
//   u_f >= 0:  phi_f = (-phi_{i-1} + 5 phi_i + 2 phi_{i+1}) / 6
//   u_f <  0:  phi_f = (2 phi_i + 5 phi_{i+1} - phi_{i+2}) / 6
// Cells outside the box count as phi = 0, so the scheme assumes the
// transported field vanishes near the edge (enforced upstream by the
// support checks). Total mass telescopes exactly.
GridField flux_divergence_tendency(const GridField& phi, const GridField& u);

// Central-difference gradient of one component of f (second order; one-sided
// second-order stencils on the edge rows).
GridField gradient_central(const GridField& f, int component = 0);

// Zero every sample below rel * max|f|. High-order flux schemes shed a halo
// of sub-roundoff-scale debris a few cells past a compact profile each step;
// left alone it compounds and walks the measured support (and eventually the
// edge-band check) away from the transported field. The floor matches the
// default support threshold, so a clipped field's support is exactly the
// region the diagnostics report. Removed mass is O(rel) per step.
inline constexpr double kDebrisFloor = 1e-12;
void clip_debris(GridField& f, double rel = kDebrisFloor);

} // namespace spray
