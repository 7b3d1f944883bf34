#include "spraylab/biot_savart.hpp"

#include <cmath>
#include <string>

#include "spraylab/errors.hpp"
#include "spraylab/interp.hpp"
#include "spraylab/kernels.hpp"

namespace spray {

GridField velocity_from_vorticity(PoissonSolver& solver, const GridField& mu) {
    auto sol = solver.solve(mu, /*want_psi=*/false, /*want_grad=*/true);
    GridField V = GridField::vector(mu.grid());
    const int n = mu.n();
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const Vec2 gpsi = sol.grad.vec_at(ix, iy);
            V.set_vec(ix, iy, {gpsi.y, -gpsi.x}); // -perp(grad psi)
        }
    }
    return V;
}

Vec2 blob_velocity_at(Vec2 x, const std::vector<Vec2>& q,
                      const std::vector<double>& w, double eps) {
    if (q.size() != w.size())
        throw ConfigError("blob velocity: positions and weights disagree in length");
    const double e2 = eps * eps;
    Vec2 u{0.0, 0.0};
    for (std::size_t k = 0; k < q.size(); ++k) {
        const double dx = x.x - q[k].x, dy = x.y - q[k].y;
        const double s = w[k] / (kTwoPi * (dx * dx + dy * dy + e2));
        u.x -= s * dy;
        u.y += s * dx;
    }
    return u;
}

void add_blob_velocity(GridField& V, const std::vector<Vec2>& q, double w, double eps) {
    if (V.components() != 2)
        throw ConfigError("blob velocity accumulates into a vector field");
    const Grid& g = V.grid();
    const int n = g.n;
    const double e2 = eps * eps;
    std::vector<double> xc(n);
    for (int i = 0; i < n; ++i) xc[i] = g.coord(i);

    double* ux = V.samples().data();
    double* uy = V.samples().data() + V.plane_size();
    const double c = w / kTwoPi;
    for (const Vec2& p : q) {
        for (int iy = 0; iy < n; ++iy) {
            const double dy = xc[iy] - p.y;
            const double dy2e = dy * dy + e2;
            double* rx = ux + static_cast<std::size_t>(iy) * n;
            double* ry = uy + static_cast<std::size_t>(iy) * n;
            for (int ix = 0; ix < n; ++ix) {
                const double dx = xc[ix] - p.x;
                const double s = c / (dx * dx + dy2e);
                rx[ix] -= s * dy;
                ry[ix] += s * dx;
            }
        }
    }
}

std::vector<double> far_field_deficit(PoissonSolver& solver, const GridField& mu,
                                      const std::vector<double>& radii, int n_angles) {
    const Grid& g = mu.grid();
    const double h = g.spacing();
    const double rsupp = support_radius(mu);
    for (double r : radii) {
        if (r <= rsupp || r >= g.half_width - 2.0 * h)
            throw ConfigError("far-field radius " + std::to_string(r) +
                              " must lie outside supp mu and 2h inside the box");
    }
    const double mass = integrate(mu);
    GridField V = velocity_from_vorticity(solver, mu);

    std::vector<double> out;
    out.reserve(radii.size());
    for (double r : radii) {
        double worst = 0.0;
        for (int a = 0; a < n_angles; ++a) {
            const double th = kTwoPi * a / n_angles;
            const Vec2 x{r * std::cos(th), r * std::sin(th)};
            const Vec2 v = bicubic_vec(V, x);
            const Vec2 mono = (mass / (kTwoPi * norm2(x))) * perp(x);
            worst = std::max(worst, norm(v - mono) * r * r);
        }
        out.push_back(worst);
    }
    return out;
}

GridField vbar_field(PoissonSolver& solver, double total_mass, const GridField& chi) {
    const double m = integrate(chi);
    if (std::fabs(m - 1.0) > 1e-6)
        throw ConfigError("reference shape chi must have unit mass, got " + std::to_string(m));
    GridField V = velocity_from_vorticity(solver, chi);
    return total_mass * V;
}

} // namespace spray
