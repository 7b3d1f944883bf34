#pragma once

#include <vector>

#include "spraylab/grid.hpp"
#include "spraylab/poisson.hpp"

namespace spray {

// Monokinetic continuum state: density omega transported by the induced
// velocity V, spray density rho transported by its own velocity field v,
// and v itself relaxing against V through the quarter-turn coupling.
struct MacroState {
    GridField omega;
    GridField rho;
    GridField v; // two components
    double t = 0.0;
};

struct MacroParams {
    double cfl = 1.0;
};

struct MacroRhs {
    GridField domega;
    GridField drho;
    GridField dv;
    double max_V = 0.0; // sup |V| over the grid, V induced by omega + rho
    double max_v = 0.0;
};

//   d/dt omega = -div(omega V)      V = -perp(grad g * (omega + rho))
//   d/dt rho   = -div(rho v)
//   d/dt v     = -(v . grad) v + perp(v - V)
// Densities move in conservative flux form, v pointwise in advective form.
MacroRhs macro_rhs(PoissonSolver& solver, const MacroState& state);

// RK4 step with the same admissibility check as the particle system:
// dt <= cfl * h / (max(|v|, |V|) + 1). Throws CflViolation otherwise and
// NumericalAbort when fields stop being finite (blowup is reported, not
// integrated through).
void step_macro(PoissonSolver& solver, MacroState& state, double dt,
                const MacroParams& prm);

// One row of the support/velocity log a run keeps per step.
struct SupportRow {
    double t = 0.0;
    double support_rho = 0.0;
    double support_omega = 0.0;
    double max_v = 0.0; // sup |v| seen during the step
    double max_V = 0.0; // sup |V| seen during the step
};

// Verifies the linear support growth bound along a logged trajectory:
//   support(t) <= support(t0) + (t - t0) * max_{s <= t} speed + slack
// with speed = max_v for rho and max_V for omega, slack = 2h.
struct SupportCheck {
    bool ok = true;
    double first_violation_time = -1.0;
    double max_excess = 0.0; // worst (left side - right side), <= 0 when ok
};
SupportCheck check_support_bound(const std::vector<SupportRow>& log, double h);

// Background/perturbation splitting around the reference shape chi:
//   u = v - Vbar,   f = perp(Vbar - V) - (Vbar . grad) Vbar
// with Vbar = total_mass * (-perp(grad g * chi)). Reports L2 norms of both
// fields and flags a mass mismatch when integrate(omega + rho) drifts from
// total_mass by more than 1e-6.
struct SplittingResult {
    GridField u;
    GridField f;
    double u_l2 = 0.0;
    double f_l2 = 0.0;
    bool mass_mismatch = false;
    double mass_error = 0.0;
};
SplittingResult splitting_residual(PoissonSolver& solver, const MacroState& state,
                                   const GridField& chi, double total_mass);

} // namespace spray
