#pragma once

#include <cstddef>
#include <vector>

#include "spraylab/vec2.hpp"

namespace spray {

// Uniform n x n cell-centered grid on the square [-L, L]^2.
// Cell (ix, iy) has its sample at (-L + (ix+0.5)h, -L + (iy+0.5)h), h = 2L/n.
struct Grid {
    Grid(double half_width, int n);

    double half_width = 0.0;
    int n = 0;

    double spacing() const { return 2.0 * half_width / n; }
    double coord(int i) const { return -half_width + (i + 0.5) * spacing(); }
    Vec2 center(int ix, int iy) const { return {coord(ix), coord(iy)}; }
    double cell_area() const { return spacing() * spacing(); }

    bool operator==(const Grid&) const = default;
};

// Sampled field on a Grid with 1 (scalar) or 2 (vector) components.
// Storage is planar: all component-0 samples, then component-1, each plane
// row major with x fastest (index iy*n + ix).
class GridField {
public:
    GridField() = default;
    GridField(const Grid& grid, int components);

    static GridField scalar(const Grid& grid) { return GridField(grid, 1); }
    static GridField vector(const Grid& grid) { return GridField(grid, 2); }

    const Grid& grid() const { return grid_; }
    int components() const { return components_; }
    int n() const { return grid_.n; }

    double& at(int c, int ix, int iy) {
        return samples_[static_cast<std::size_t>(c) * plane_ + static_cast<std::size_t>(iy) * grid_.n + ix];
    }
    double at(int c, int ix, int iy) const {
        return samples_[static_cast<std::size_t>(c) * plane_ + static_cast<std::size_t>(iy) * grid_.n + ix];
    }
    // scalar shorthand
    double& at(int ix, int iy) { return at(0, ix, iy); }
    double at(int ix, int iy) const { return at(0, ix, iy); }

    Vec2 vec_at(int ix, int iy) const { return {at(0, ix, iy), at(1, ix, iy)}; }
    void set_vec(int ix, int iy, Vec2 v) { at(0, ix, iy) = v.x; at(1, ix, iy) = v.y; }

    std::vector<double>& samples() { return samples_; }
    const std::vector<double>& samples() const { return samples_; }
    std::size_t plane_size() const { return plane_; }

    bool finite() const;

private:
    Grid grid_{1.0, 16};
    int components_ = 1;
    std::size_t plane_ = 0;
    std::vector<double> samples_;
};

// h^2 * sum of samples; scalar fields only.
double integrate(const GridField& f);

// max |sample| over all components
double linf_norm(const GridField& f);

// sqrt(h^2 * sum f^2) over all components (grid quadrature of the L2 norm)
double l2_norm(const GridField& f);

// Radius of the smallest origin-centered disk containing every cell center
// whose |sample| exceeds the threshold; 0 if none do. A negative threshold
// requests the default 1e-12 * max|f|.
double support_radius(const GridField& f, double threshold = -1.0);

// max |sample| over cells whose center lies within `margin` of the box edge
// (used by the convolution precondition check)
double boundary_band_max(const GridField& f, double margin);

GridField operator+(const GridField& a, const GridField& b);
GridField operator-(const GridField& a, const GridField& b);
GridField operator*(double s, const GridField& a);

} // namespace spray
