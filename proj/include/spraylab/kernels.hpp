#pragma once

#include <cmath>
#include <numbers>

#include "spraylab/errors.hpp"
#include "spraylab/vec2.hpp"

namespace spray {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// g(x) = -ln|x| / (2 pi), the kernel with -Laplacian g = delta in the plane
inline double green_kernel(Vec2 x) {
    const double r2 = norm2(x);
    if (r2 == 0.0) throw NumericalAbort("green_kernel evaluated at the origin");
    return -0.5 * std::log(r2) / kTwoPi;
}

// grad g(x) = -x / (2 pi |x|^2)
inline Vec2 grad_green(Vec2 x) {
    const double r2 = norm2(x);
    if (r2 == 0.0) throw NumericalAbort("grad_green evaluated at the origin");
    const double s = -1.0 / (kTwoPi * r2);
    return {s * x.x, s * x.y};
}

// Blob-regularized gradient: -x / (2 pi (|x|^2 + eps^2)). Finite at 0.
inline Vec2 grad_green_blob(Vec2 x, double eps) {
    const double s = -1.0 / (kTwoPi * (norm2(x) + eps * eps));
    return {s * x.x, s * x.y};
}

// Exact mean of g over the cell [-h/2, h/2]^2. From
//   integral of ln|x| over [-a,a]^2 = 4 a^2 (ln a + (ln 2 - 3 + pi/2)/2)
// with a = h/2. Used for the singular cell of the convolution kernel table;
// the test suite re-derives this by numerical quadrature.
inline double green_cell_average(double h) {
    const double a = 0.5 * h;
    const double mean_log = std::log(a) + 0.5 * (std::numbers::ln2 - 3.0 + 0.5 * std::numbers::pi);
    return -mean_log / kTwoPi;
}

} // namespace spray
