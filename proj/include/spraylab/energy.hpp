#pragma once

#include <vector>

#include "spraylab/macro.hpp"
#include "spraylab/micro.hpp"
#include "spraylab/poisson.hpp"

namespace spray {

// Confinement constant policy for the bookkeeping term T6 = B_N/N + ln N/(2N),
// B_N = c0 * (1 + ||rho + omega - omega_N||_inf). When the assembled Coulomb
// block plus T6 comes out negative the evaluator doubles c0 until it is not,
// and counts the escalations so the harness can log them.
struct BNPolicy {
    double c0 = 1.0;
    int escalations = 0;
};

// Modulated energy between a monokinetic macro state and a particle state:
//   T1 = (1/N) sum |v(q_i) - p_i|^2
//   T2 = double Coulomb integral of omega_N + atoms, diagonal excluded
//   T3 = double Coulomb integral of omega + rho
//   T4 = -2 * cross Coulomb integral between (omega + rho) and omega_N + atoms
//   T5 = ||omega - omega_N||_L2^2
//   T6 = B_N/N + ln N/(2N)
// T2 + T3 + T4 collapses to the double Coulomb integral of the signed
// difference (omega + rho - omega_N) - atoms; that value is reported as
// coulomb_block. H = T1 + ... + T6, H_tilde = H - T6.
struct EnergyBreakdown {
    double t = 0.0;
    double T1 = 0.0, T2 = 0.0, T3 = 0.0, T4 = 0.0, T5 = 0.0, T6 = 0.0;
    double coulomb_block = 0.0;
    double H = 0.0;
    double H_tilde = 0.0;
};

EnergyBreakdown modulated_energy(PoissonSolver& solver, const MacroState& macro,
                                 const MicroState& micro, BNPolicy& policy,
                                 double time_tolerance = 1e-9);

// Double Coulomb integral of the signed measure (mu - atoms), diagonal of the
// atomic part excluded:
//   integral (g*mu) mu  -  2 sum_k w_k (g*mu)(x_k)  +  sum_{k != l} w_k w_l g(x_k - x_l)
// The cross term interpolates psi = g*mu bicubically. Coincident atoms abort.
double coulomb_double_integral(PoissonSolver& solver, const GridField& mu,
                               const std::vector<Vec2>& atoms,
                               const std::vector<double>& weights);

// Exact dissipation identity of the modulated energy, evaluated on the
// current states:
//   R1 = -(2/N) sum grad v(q_i) : (v(q_i) - p_i) tensor (v(q_i) - p_i)
//   R2 = double integral of (v(x) - v(y)) . grad g(x - y) against the
//        signed difference squared, diagonal excluded
//   R3 = integral 2 (perp v - perp V - grad omega) . (V - V_N) (omega - omega_N)
struct RateBreakdown {
    double R1 = 0.0, R2 = 0.0, R3 = 0.0;
    double sum = 0.0;
};
RateBreakdown energy_rate(PoissonSolver& solver, const MacroState& macro,
                          const MicroState& micro, const MicroParams& prm,
                          double time_tolerance = 1e-9);

// Weak-distance report between the particle phase-space measure and the
// monokinetic sheet rho(x) delta(xi - v(x)). The negative-order metric is
// replaced by a finite surrogate: max over 4D Fourier modes e^{i kappa.(x,xi)}
// with |k|_inf <= K on [-L,L]^2 x [-P,P]^2 of the pairing gap, normalized by
// the box-spectral H^5 norm of the mode. P = 0 asks for the momentum box to
// be fitted to the data.
struct CoercivityReport {
    double dict_distance = 0.0;
    double l2_omega_gap = 0.0;
    double weak_rho_gap = 0.0; // spectral s = -2 norm of rho minus deposited atoms
    int K = 0;
    double momentum_half_width = 0.0;
};
CoercivityReport coercivity_report(const MacroState& macro, const MicroState& micro,
                                   int K, double P = 0.0);

// Initial-data diagnostics: how close the sampled state is to the continuum
// fields it discretizes.
struct WellPreparedness {
    double l2_omega_gap = 0.0;
    double weak_rho_dict = 0.0;  // 2D mode gap of rho vs atoms, H^2-normalized
    double pair_vs_double = 0.0; // |(1/N^2) sum_{i!=j} g - integral (g*rho) rho|
    double coulomb_block = 0.0;
};
WellPreparedness well_preparedness_check(PoissonSolver& solver, const MacroState& macro,
                                         const MicroState& micro, int K = 2);

// Bilinear (cloud-in-cell) deposit of the atoms onto the grid as a density.
GridField deposit_atoms(const Grid& grid, const std::vector<Vec2>& q, double total_weight);

} // namespace spray
