#include "spraylab/macro.hpp"

#include <cmath>
#include <string>

#include "spraylab/biot_savart.hpp"
#include "spraylab/errors.hpp"
#include "spraylab/transport.hpp"

namespace spray {

namespace {

double max_speed(const GridField& vel) {
    double m = 0.0;
    const int n = vel.n();
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            m = std::max(m, norm(vel.vec_at(ix, iy)));
    return m;
}

GridField advect_and_turn(const GridField& v, const GridField& V) {
    // -(v . grad) v + perp(v - V), assembled pointwise
    GridField out = GridField::vector(v.grid());
    const GridField gvx = gradient_central(v, 0);
    const GridField gvy = gradient_central(v, 1);
    const int n = v.n();
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const Vec2 vv = v.vec_at(ix, iy);
            const Vec2 w = vv - V.vec_at(ix, iy);
            const Vec2 gx = gvx.vec_at(ix, iy); // (dvx/dx, dvx/dy)
            const Vec2 gy = gvy.vec_at(ix, iy);
            out.at(0, ix, iy) = -(vv.x * gx.x + vv.y * gx.y) - w.y;
            out.at(1, ix, iy) = -(vv.x * gy.x + vv.y * gy.y) + w.x;
        }
    }
    return out;
}

GridField axpy(const GridField& base, const GridField& k, double a) {
    GridField out = base;
    for (std::size_t i = 0; i < out.samples().size(); ++i)
        out.samples()[i] += a * k.samples()[i];
    return out;
}

} // namespace

MacroRhs macro_rhs(PoissonSolver& solver, const MacroState& state) {
    const GridField V = velocity_from_vorticity(solver, state.omega + state.rho);
    MacroRhs rhs{
        flux_divergence_tendency(state.omega, V),
        flux_divergence_tendency(state.rho, state.v),
        advect_and_turn(state.v, V),
        max_speed(V),
        max_speed(state.v),
    };
    return rhs;
}

void step_macro(PoissonSolver& solver, MacroState& state, double dt,
                const MacroParams& prm) {
    const double h = state.omega.grid().spacing();

    MacroRhs k1 = macro_rhs(solver, state);
    const double speed = std::max(k1.max_v, k1.max_V) + 1.0;
    if (dt > prm.cfl * h / speed)
        throw CflViolation("dt = " + std::to_string(dt) + " exceeds the admissible " +
                               std::to_string(prm.cfl * h / speed) + " at t = " +
                               std::to_string(state.t),
                           state.t);

    MacroState s2{axpy(state.omega, k1.domega, 0.5 * dt), axpy(state.rho, k1.drho, 0.5 * dt),
                  axpy(state.v, k1.dv, 0.5 * dt), state.t};
    MacroRhs k2 = macro_rhs(solver, s2);
    MacroState s3{axpy(state.omega, k2.domega, 0.5 * dt), axpy(state.rho, k2.drho, 0.5 * dt),
                  axpy(state.v, k2.dv, 0.5 * dt), state.t};
    MacroRhs k3 = macro_rhs(solver, s3);
    MacroState s4{axpy(state.omega, k3.domega, dt), axpy(state.rho, k3.drho, dt),
                  axpy(state.v, k3.dv, dt), state.t};
    MacroRhs k4 = macro_rhs(solver, s4);

    auto combine = [&](GridField& y, const GridField& a, const GridField& b,
                       const GridField& c, const GridField& d) {
        const double w = dt / 6.0;
        for (std::size_t i = 0; i < y.samples().size(); ++i)
            y.samples()[i] += w * (a.samples()[i] + 2.0 * b.samples()[i] +
                                   2.0 * c.samples()[i] + d.samples()[i]);
    };
    combine(state.omega, k1.domega, k2.domega, k3.domega, k4.domega);
    combine(state.rho, k1.drho, k2.drho, k3.drho, k4.drho);
    combine(state.v, k1.dv, k2.dv, k3.dv, k4.dv);
    clip_debris(state.omega);
    clip_debris(state.rho);
    state.t += dt;

    if (!state.omega.finite() || !state.rho.finite() || !state.v.finite())
        throw NumericalAbort("macro fields stopped being finite at t = " +
                                 std::to_string(state.t),
                             state.t);
}

SupportCheck check_support_bound(const std::vector<SupportRow>& log, double h) {
    SupportCheck out;
    if (log.empty()) return out;
    out.max_excess = -1e300;
    const SupportRow& base = log.front();
    double v_sup = 0.0, V_sup = 0.0;
    for (const SupportRow& row : log) {
        v_sup = std::max(v_sup, row.max_v);
        V_sup = std::max(V_sup, row.max_V);
        const double dt = row.t - base.t;
        const double slack = 2.0 * h;
        const double excess_rho = row.support_rho - (base.support_rho + dt * v_sup + slack);
        const double excess_omega = row.support_omega - (base.support_omega + dt * V_sup + slack);
        const double excess = std::max(excess_rho, excess_omega);
        out.max_excess = std::max(out.max_excess, excess);
        if (excess > 0.0 && out.ok) {
            out.ok = false;
            out.first_violation_time = row.t;
        }
    }
    return out;
}

SplittingResult splitting_residual(PoissonSolver& solver, const MacroState& state,
                                   const GridField& chi, double total_mass) {
    const GridField Vbar = vbar_field(solver, total_mass, chi);
    const GridField V = velocity_from_vorticity(solver, state.omega + state.rho);

    SplittingResult out;
    out.u = state.v - Vbar;

    out.f = GridField::vector(state.v.grid());
    const GridField gx = gradient_central(Vbar, 0);
    const GridField gy = gradient_central(Vbar, 1);
    const int n = state.v.n();
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const Vec2 w = Vbar.vec_at(ix, iy) - V.vec_at(ix, iy);
            const Vec2 vb = Vbar.vec_at(ix, iy);
            const Vec2 ax = gx.vec_at(ix, iy);
            const Vec2 ay = gy.vec_at(ix, iy);
            out.f.at(0, ix, iy) = -w.y - (vb.x * ax.x + vb.y * ax.y);
            out.f.at(1, ix, iy) = w.x - (vb.x * ay.x + vb.y * ay.y);
        }
    }
    out.u_l2 = l2_norm(out.u);
    out.f_l2 = l2_norm(out.f);
    out.mass_error = std::fabs(integrate(state.omega) + integrate(state.rho) - total_mass);
    out.mass_mismatch = out.mass_error > 1e-6;
    return out;
}

} // namespace spray
