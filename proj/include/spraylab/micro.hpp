#pragma once

#include <vector>

#include "spraylab/grid.hpp"
#include "spraylab/poisson.hpp"

namespace spray {

// Equal-weight particles (weight 1/N each), positions q and momenta p.
struct ParticleSet {
    std::vector<Vec2> q;
    std::vector<Vec2> p;
    int size() const { return static_cast<int>(q.size()); }
};

// Discrete state: background density omega_N on the grid plus N particles.
struct MicroState {
    GridField omega;
    ParticleSet particles;
    double t = 0.0;
};

struct MicroParams {
    double blob_eps_factor = 2.0;          // blob width eps = factor * h
    double cfl = 1.0;                      // admissibility constant of the dt check
    double collision_floor_factor = 1e-10; // abort when a pair gets closer than factor * L
};

// Right-hand side of the particle block:
//   dq_i = p_i
//   dp_i = perp(p_i) - grad(g * omega_N)(q_i) - (1/N) sum_{j != i} grad g(q_i - q_j)
// The grid coupling interpolates the convolution gradient bicubically; the
// pair interaction uses the exact kernel with the diagonal excluded (never
// regularized). Also reports the minimal pair distance seen.
struct MicroForces {
    std::vector<Vec2> dq;
    std::vector<Vec2> dp;
    double min_pair_distance;
    double max_speed;
};
MicroForces particle_forces(PoissonSolver& solver, const MicroState& state,
                            const MicroParams& prm);

// Transport velocity of omega_N: the grid-induced part plus the blob field
// of the particles (weights 1/N, width eps = blob_eps_factor * h).
GridField fluid_velocity(PoissonSolver& solver, const MicroState& state,
                         const MicroParams& prm);

// One shared-dt RK4 step of the coupled particle + transport system.
// Throws CflViolation when dt > cfl * h / (max|V_N| + max|p| + 1), and
// CollisionError when two particles come within the collision floor.
void step_micro(PoissonSolver& solver, MicroState& state, double dt,
                const MicroParams& prm);

// Conserved energy of the system:
//   (1/N) sum |p_i|^2
//   + integral (g*omega_N) omega_N
//   + (2/N) sum_i (g*omega_N)(q_i)
//   + (1/N^2) sum_{i != j} g(q_i - q_j)
struct MicroEnergy {
    double kinetic = 0.0;
    double interaction = 0.0;
    double total = 0.0;
};
MicroEnergy microscopic_energy(PoissonSolver& solver, const MicroState& state);

} // namespace spray
