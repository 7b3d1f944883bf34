#include "spraylab/interp.hpp"

#include <algorithm>
#include <cmath>

#include "spraylab/errors.hpp"

namespace spray {

namespace {

struct Frac {
    int i0;     // base cell index
    double t;   // offset in cells from the base cell center
};

// Map a physical coordinate to cell-center index space: cell i sits at u = i.
Frac locate(const Grid& g, double x, double half_width) {
    if (std::fabs(x) > half_width)
        throw NumericalAbort("interpolation point left the box");
    const double u = (x + half_width) / g.spacing() - 0.5;
    int i0 = static_cast<int>(std::floor(u));
    i0 = std::clamp(i0, 0, g.n - 2);
    return {i0, u - i0};
}

int clampi(int i, int n) { return std::clamp(i, 0, n - 1); }

// Keys cubic convolution weights, a = -1/2 (Catmull-Rom)
void cubic_weights(double t, double w[4]) {
    const double t2 = t * t, t3 = t2 * t;
    w[0] = -0.5 * t + t2 - 0.5 * t3;
    w[1] = 1.0 - 2.5 * t2 + 1.5 * t3;
    w[2] = 0.5 * t + 2.0 * t2 - 1.5 * t3;
    w[3] = -0.5 * t2 + 0.5 * t3;
}

} // namespace

double interpolate_scalar(const GridField& f, Vec2 x, int component) {
    const Grid& g = f.grid();
    const Frac fx = locate(g, x.x, g.half_width);
    const Frac fy = locate(g, x.y, g.half_width);
    const double f00 = f.at(component, fx.i0, fy.i0);
    const double f10 = f.at(component, fx.i0 + 1, fy.i0);
    const double f01 = f.at(component, fx.i0, fy.i0 + 1);
    const double f11 = f.at(component, fx.i0 + 1, fy.i0 + 1);
    const double a = f00 + fx.t * (f10 - f00);
    const double b = f01 + fx.t * (f11 - f01);
    return a + fy.t * (b - a);
}

Vec2 interpolate_vec(const GridField& f, Vec2 x) {
    return {interpolate_scalar(f, x, 0), interpolate_scalar(f, x, 1)};
}

double bicubic_scalar(const GridField& f, Vec2 x, int component) {
    const Grid& g = f.grid();
    const Frac fx = locate(g, x.x, g.half_width);
    const Frac fy = locate(g, x.y, g.half_width);
    double wx[4], wy[4];
    cubic_weights(fx.t, wx);
    cubic_weights(fy.t, wy);
    double acc = 0.0;
    for (int dy = -1; dy <= 2; ++dy) {
        const int iy = clampi(fy.i0 + dy, g.n);
        double row = 0.0;
        for (int dx = -1; dx <= 2; ++dx) {
            const int ix = clampi(fx.i0 + dx, g.n);
            row += wx[dx + 1] * f.at(component, ix, iy);
        }
        acc += wy[dy + 1] * row;
    }
    return acc;
}

Vec2 bicubic_vec(const GridField& f, Vec2 x) {
    return {bicubic_scalar(f, x, 0), bicubic_scalar(f, x, 1)};
}

} // namespace spray
