#pragma once

#include "spraylab/grid.hpp"

namespace spray {

// Bilinear interpolation at a point inside the box [-L, L]^2; exact for
// fields affine in each coordinate. Throws NumericalAbort when the point
// leaves the box. Within half a cell of the edge the stencil is clamped
// (linear extrapolation from the outermost cell pair).
double interpolate_scalar(const GridField& f, Vec2 x, int component = 0);
Vec2 interpolate_vec(const GridField& f, Vec2 x);

// Cubic convolution interpolation (Keys kernel, a = -1/2). Third order
// accurate for smooth fields; used where the quadratic error of bilinear
// would dominate a diagnostic.
double bicubic_scalar(const GridField& f, Vec2 x, int component = 0);
Vec2 bicubic_vec(const GridField& f, Vec2 x);

} // namespace spray
