#include "spraylab/transport.hpp"

#include <cmath>

#include "spraylab/errors.hpp"

namespace spray {

namespace {

inline double at0(const GridField& f, int ix, int iy) {
    if (ix < 0 || iy < 0 || ix >= f.n() || iy >= f.n()) return 0.0;
    return f.at(ix, iy);
}

inline double face_value(double um, double u0, double u1, double u2, double wind) {
    if (wind >= 0.0) return (-um + 5.0 * u0 + 2.0 * u1) / 6.0;
    return (2.0 * u0 + 5.0 * u1 - u2) / 6.0;
}

inline int clampi(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

} // namespace

GridField flux_divergence_tendency(const GridField& phi, const GridField& u) {
    if (phi.components() != 1 || u.components() != 2)
        throw ConfigError("flux tendency expects scalar phi and vector u");
    if (!(phi.grid() == u.grid()))
        throw ConfigError("flux tendency: phi and u live on different grids");

    const int n = phi.n();
    const double h = phi.grid().spacing();
    GridField out = GridField::scalar(phi.grid());

    // x sweep: for each row, walk faces i+1/2 for i in [-1, n-1]
    for (int iy = 0; iy < n; ++iy) {
        double flux_left = 0.0;
        {
            // face -1/2 (between ghost and cell 0)
            const double uf = 0.5 * (u.at(0, clampi(-1, n), iy) + u.at(0, 0, iy));
            const double pf = face_value(0.0, 0.0, at0(phi, 0, iy), at0(phi, 1, iy), uf);
            flux_left = uf * pf;
        }
        for (int ix = 0; ix < n; ++ix) {
            const double uf = 0.5 * (u.at(0, ix, iy) + u.at(0, clampi(ix + 1, n), iy));
            const double pf = face_value(at0(phi, ix - 1, iy), at0(phi, ix, iy),
                                         at0(phi, ix + 1, iy), at0(phi, ix + 2, iy), uf);
            const double flux_right = uf * pf;
            out.at(ix, iy) -= (flux_right - flux_left) / h;
            flux_left = flux_right;
        }
    }
    // y sweep
    for (int ix = 0; ix < n; ++ix) {
        double flux_bottom = 0.0;
        {
            const double uf = 0.5 * (u.at(1, ix, clampi(-1, n)) + u.at(1, ix, 0));
            const double pf = face_value(0.0, 0.0, at0(phi, ix, 0), at0(phi, ix, 1), uf);
            flux_bottom = uf * pf;
        }
        for (int iy = 0; iy < n; ++iy) {
            const double uf = 0.5 * (u.at(1, ix, iy) + u.at(1, ix, clampi(iy + 1, n)));
            const double pf = face_value(at0(phi, ix, iy - 1), at0(phi, ix, iy),
                                         at0(phi, ix, iy + 1), at0(phi, ix, iy + 2), uf);
            const double flux_top = uf * pf;
            out.at(ix, iy) -= (flux_top - flux_bottom) / h;
            flux_bottom = flux_top;
        }
    }
    return out;
}

GridField gradient_central(const GridField& f, int component) {
    const int n = f.n();
    const double h = f.grid().spacing();
    GridField out = GridField::vector(f.grid());
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            double gx, gy;
            if (ix == 0)
                gx = (-3.0 * f.at(component, 0, iy) + 4.0 * f.at(component, 1, iy) - f.at(component, 2, iy)) / (2.0 * h);
            else if (ix == n - 1)
                gx = (3.0 * f.at(component, n - 1, iy) - 4.0 * f.at(component, n - 2, iy) + f.at(component, n - 3, iy)) / (2.0 * h);
            else
                gx = (f.at(component, ix + 1, iy) - f.at(component, ix - 1, iy)) / (2.0 * h);
            if (iy == 0)
                gy = (-3.0 * f.at(component, ix, 0) + 4.0 * f.at(component, ix, 1) - f.at(component, ix, 2)) / (2.0 * h);
            else if (iy == n - 1)
                gy = (3.0 * f.at(component, ix, n - 1) - 4.0 * f.at(component, ix, n - 2) + f.at(component, ix, n - 3)) / (2.0 * h);
            else
                gy = (f.at(component, ix, iy + 1) - f.at(component, ix, iy - 1)) / (2.0 * h);
            out.at(0, ix, iy) = gx;
            out.at(1, ix, iy) = gy;
        }
    }
    return out;
}

void clip_debris(GridField& f, double rel) {
    double peak = 0.0;
    for (double v : f.samples()) peak = std::max(peak, std::abs(v));
    const double floor = rel * peak;
    if (floor <= 0.0) return;
    for (double& v : f.samples())
        if (std::abs(v) < floor) v = 0.0;
}

} // namespace spray
