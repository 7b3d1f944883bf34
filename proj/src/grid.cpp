#include "spraylab/grid.hpp"

#include <cmath>
#include <string>

#include "spraylab/errors.hpp"

namespace spray {

namespace {

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

void require_same_shape(const GridField& a, const GridField& b) {
    if (!(a.grid() == b.grid()) || a.components() != b.components())
        throw ConfigError("grid field shape mismatch");
}

} // namespace

Grid::Grid(double hw, int cells) : half_width(hw), n(cells) {
    if (!(hw > 0.0))
        throw ConfigError("grid half_width must be positive, got " + std::to_string(hw));
    if (n < 16 || !is_pow2(n))
        throw ConfigError("grid n must be a power of two >= 16, got " + std::to_string(n));
}

GridField::GridField(const Grid& grid, int components)
    : grid_(grid), components_(components),
      plane_(static_cast<std::size_t>(grid.n) * grid.n) {
    if (components != 1 && components != 2)
        throw ConfigError("grid field must have 1 or 2 components");
    samples_.assign(plane_ * components_, 0.0);
}

bool GridField::finite() const {
    for (double v : samples_)
        if (!std::isfinite(v)) return false;
    return true;
}

double integrate(const GridField& f) {
    if (f.components() != 1)
        throw ConfigError("integrate expects a scalar field");
    double s = 0.0;
    for (double v : f.samples()) s += v;
    return s * f.grid().cell_area();
}

double linf_norm(const GridField& f) {
    double m = 0.0;
    for (double v : f.samples()) m = std::max(m, std::fabs(v));
    return m;
}

double l2_norm(const GridField& f) {
    double s = 0.0;
    for (double v : f.samples()) s += v * v;
    return std::sqrt(s * f.grid().cell_area());
}

double support_radius(const GridField& f, double threshold) {
    if (threshold < 0.0) threshold = 1e-12 * linf_norm(f);
    const Grid& g = f.grid();
    double r2max = 0.0;
    for (int iy = 0; iy < g.n; ++iy) {
        for (int ix = 0; ix < g.n; ++ix) {
            bool occupied = false;
            for (int c = 0; c < f.components(); ++c)
                if (std::fabs(f.at(c, ix, iy)) > threshold) occupied = true;
            if (!occupied) continue;
            r2max = std::max(r2max, norm2(g.center(ix, iy)));
        }
    }
    return std::sqrt(r2max);
}

double boundary_band_max(const GridField& f, double margin) {
    const Grid& g = f.grid();
    const double inner = g.half_width - margin;
    double m = 0.0;
    for (int iy = 0; iy < g.n; ++iy) {
        for (int ix = 0; ix < g.n; ++ix) {
            Vec2 c = g.center(ix, iy);
            if (std::fabs(c.x) < inner && std::fabs(c.y) < inner) continue;
            for (int k = 0; k < f.components(); ++k)
                m = std::max(m, std::fabs(f.at(k, ix, iy)));
        }
    }
    return m;
}

GridField operator+(const GridField& a, const GridField& b) {
    require_same_shape(a, b);
    GridField out = a;
    for (std::size_t i = 0; i < out.samples().size(); ++i)
        out.samples()[i] += b.samples()[i];
    return out;
}

GridField operator-(const GridField& a, const GridField& b) {
    require_same_shape(a, b);
    GridField out = a;
    for (std::size_t i = 0; i < out.samples().size(); ++i)
        out.samples()[i] -= b.samples()[i];
    return out;
}

GridField operator*(double s, const GridField& a) {
    GridField out = a;
    for (double& v : out.samples()) v *= s;
    return out;
}

} // namespace spray
