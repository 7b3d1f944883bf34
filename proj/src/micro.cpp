#include "spraylab/micro.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "spraylab/biot_savart.hpp"
#include "spraylab/errors.hpp"
#include "spraylab/interp.hpp"
#include "spraylab/kernels.hpp"
#include "spraylab/transport.hpp"

namespace spray {

namespace {

struct PairInfo {
    std::vector<Vec2> pair_force; // (1/N)-weighted Coulomb repulsion, per particle
    double min_dist2 = std::numeric_limits<double>::infinity();
};

// Exact pairwise kernel gradient sums, symmetric accumulation.
PairInfo pair_interactions(const ParticleSet& ps) {
    const int N = ps.size();
    PairInfo out;
    out.pair_force.assign(N, Vec2{0.0, 0.0});
    const double w = N > 0 ? 1.0 / N : 0.0;
    for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) {
            const double dx = ps.q[i].x - ps.q[j].x;
            const double dy = ps.q[i].y - ps.q[j].y;
            const double r2 = dx * dx + dy * dy;
            if (r2 < out.min_dist2) out.min_dist2 = r2;
            // -grad g(q_i - q_j) = (q_i - q_j) / (2 pi r^2), equal and opposite on j
            const double s = w / (kTwoPi * r2);
            out.pair_force[i] += Vec2{s * dx, s * dy};
            out.pair_force[j] -= Vec2{s * dx, s * dy};
        }
    }
    return out;
}

MicroForces forces_from_grad(const GridField& grad_psi, const ParticleSet& ps) {
    const int N = ps.size();
    MicroForces out;
    out.dq = ps.p;
    out.dp.assign(N, Vec2{0.0, 0.0});
    out.max_speed = 0.0;

    PairInfo pairs = pair_interactions(ps);
    out.min_pair_distance = std::sqrt(pairs.min_dist2);
    for (int i = 0; i < N; ++i) {
        const Vec2 gp = bicubic_vec(grad_psi, ps.q[i]);
        out.dp[i] = perp(ps.p[i]) - gp + pairs.pair_force[i];
        out.max_speed = std::max(out.max_speed, norm(ps.p[i]));
    }
    return out;
}

struct MicroRhs {
    MicroForces forces;
    GridField domega;
    double max_velocity = 0.0; // sup of the transport velocity over the grid
};

MicroRhs micro_rhs(PoissonSolver& solver, const GridField& omega,
                   const ParticleSet& ps, const MicroParams& prm) {
    auto sol = solver.solve(omega, /*want_psi=*/false, /*want_grad=*/true);

    GridField V = GridField::vector(omega.grid());
    const int n = omega.n();
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            const Vec2 gp = sol.grad.vec_at(ix, iy);
            V.set_vec(ix, iy, {gp.y, -gp.x});
        }
    if (ps.size() > 0) {
        const double eps = prm.blob_eps_factor * omega.grid().spacing();
        add_blob_velocity(V, ps.q, 1.0 / ps.size(), eps);
    }

    MicroRhs rhs{forces_from_grad(sol.grad, ps), flux_divergence_tendency(omega, V), 0.0};
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            rhs.max_velocity = std::max(rhs.max_velocity, norm(V.vec_at(ix, iy)));
    return rhs;
}

void axpy_particles(ParticleSet& out, const ParticleSet& base,
                    const MicroForces& k, double a) {
    const int N = base.size();
    out.q.resize(N);
    out.p.resize(N);
    for (int i = 0; i < N; ++i) {
        out.q[i] = base.q[i] + a * k.dq[i];
        out.p[i] = base.p[i] + a * k.dp[i];
    }
}

GridField axpy_field(const GridField& base, const GridField& k, double a) {
    GridField out = base;
    for (std::size_t i = 0; i < out.samples().size(); ++i)
        out.samples()[i] += a * k.samples()[i];
    return out;
}

} // namespace

MicroForces particle_forces(PoissonSolver& solver, const MicroState& state,
                            const MicroParams& prm) {
    (void)prm; // pair terms and the grid coupling carry no tunables today
    auto sol = solver.solve(state.omega, false, true);
    return forces_from_grad(sol.grad, state.particles);
}

GridField fluid_velocity(PoissonSolver& solver, const MicroState& state,
                         const MicroParams& prm) {
    GridField V = velocity_from_vorticity(solver, state.omega);
    if (state.particles.size() > 0) {
        const double eps = prm.blob_eps_factor * state.omega.grid().spacing();
        add_blob_velocity(V, state.particles.q, 1.0 / state.particles.size(), eps);
    }
    return V;
}

void step_micro(PoissonSolver& solver, MicroState& state, double dt,
                const MicroParams& prm) {
    const double h = state.omega.grid().spacing();
    const double floor = prm.collision_floor_factor * state.omega.grid().half_width;

    MicroRhs k1 = micro_rhs(solver, state.omega, state.particles, prm);
    if (state.particles.size() > 1 && k1.forces.min_pair_distance < floor)
        throw CollisionError("particle pair below the collision floor at t = " +
                                 std::to_string(state.t),
                             state.t);
    const double speed = k1.max_velocity + k1.forces.max_speed + 1.0;
    if (dt > prm.cfl * h / speed)
        throw CflViolation("dt = " + std::to_string(dt) + " exceeds the admissible " +
                               std::to_string(prm.cfl * h / speed) + " at t = " +
                               std::to_string(state.t),
                           state.t);

    ParticleSet ps2, ps3, ps4;
    axpy_particles(ps2, state.particles, k1.forces, 0.5 * dt);
    GridField om2 = axpy_field(state.omega, k1.domega, 0.5 * dt);
    MicroRhs k2 = micro_rhs(solver, om2, ps2, prm);

    axpy_particles(ps3, state.particles, k2.forces, 0.5 * dt);
    GridField om3 = axpy_field(state.omega, k2.domega, 0.5 * dt);
    MicroRhs k3 = micro_rhs(solver, om3, ps3, prm);

    axpy_particles(ps4, state.particles, k3.forces, dt);
    GridField om4 = axpy_field(state.omega, k3.domega, dt);
    MicroRhs k4 = micro_rhs(solver, om4, ps4, prm);

    const int N = state.particles.size();
    const double w = dt / 6.0;
    for (int i = 0; i < N; ++i) {
        state.particles.q[i] += w * (k1.forces.dq[i] + 2.0 * k2.forces.dq[i] +
                                     2.0 * k3.forces.dq[i] + k4.forces.dq[i]);
        state.particles.p[i] += w * (k1.forces.dp[i] + 2.0 * k2.forces.dp[i] +
                                     2.0 * k3.forces.dp[i] + k4.forces.dp[i]);
    }
    for (std::size_t i = 0; i < state.omega.samples().size(); ++i) {
        state.omega.samples()[i] += w * (k1.domega.samples()[i] + 2.0 * k2.domega.samples()[i] +
                                         2.0 * k3.domega.samples()[i] + k4.domega.samples()[i]);
    }
    clip_debris(state.omega);
    state.t += dt;
}

MicroEnergy microscopic_energy(PoissonSolver& solver, const MicroState& state) {
    const int N = state.particles.size();
    MicroEnergy e;
    for (const Vec2& p : state.particles.p) e.kinetic += norm2(p);
    if (N > 0) e.kinetic /= N;

    auto sol = solver.solve(state.omega, /*want_psi=*/true, /*want_grad=*/false);
    double grid_grid = 0.0;
    for (std::size_t i = 0; i < state.omega.samples().size(); ++i)
        grid_grid += sol.psi.samples()[i] * state.omega.samples()[i];
    grid_grid *= state.omega.grid().cell_area();

    double cross = 0.0, pairs = 0.0;
    for (int i = 0; i < N; ++i)
        cross += bicubic_scalar(sol.psi, state.particles.q[i]);
    if (N > 0) cross *= 2.0 / N;
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j)
            pairs += 2.0 * green_kernel(state.particles.q[i] - state.particles.q[j]);
    if (N > 0) pairs /= static_cast<double>(N) * N;

    e.interaction = grid_grid + cross + pairs;
    e.total = e.kinetic + e.interaction;
    return e;
}

} // namespace spray
