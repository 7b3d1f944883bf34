#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "spraylab/config.hpp"
#include "spraylab/energy.hpp"
#include "spraylab/macro.hpp"
#include "spraylab/micro.hpp"

namespace spray {

inline constexpr const char* kVersionString = "spraylab 0.1.0";

// Everything a coupled run leaves behind, in one directory:
//   config.echo            the config text, byte for byte
//   version.txt            kVersionString
//   energy.csv             step,t,T1..T6,coulomb_block,H,H_tilde,
//                          R1,R2,R3,rate_sum,H_rate_fd
//                          (rate columns are nan off the report cadence;
//                          H_rate_fd is the centered difference of H, nan at
//                          the endpoints)
//   coercivity.csv         step,t,dict_distance,l2_omega_gap,weak_rho_gap
//   macro_diagnostics.csv  step,t,mass_rho,mass_omega,l2_omega,
//                          support_rho,support_omega,max_v,max_V
//   micro_trajectory.csv   step,t,particle,qx,qy,px,py
//   snapshots/*.field      omega/rho/v/omega_n at the snapshot cadence
// Rows are logged at step 0, every `cadence` steps, and the final step;
// the modulated energy itself is evaluated every step.
struct RunSummary {
    int N = 0;
    std::uint64_t seed = 0;
    int steps_completed = 0;
    double t_end = 0.0;
    bool aborted = false;
    double abort_time = -1.0;
    std::string abort_reason;
    bool overlap_warning = false;
    int escalations = 0;
    EnergyBreakdown first;
    EnergyBreakdown last;
    double H_tilde_sup = 0.0; // sup over all completed steps
    CoercivityReport coercivity_first;
    CoercivityReport coercivity_last;
    std::vector<double> H_per_step; // H at steps 0..steps_completed
};

RunSummary run_coupled_single(const ExperimentConfig& cfg, int N,
                              const std::filesystem::path& dir);

// One run per entry of cfg.n_list (particle seed = cfg.seed + N), each in
// subdirectory N_<count>, at most `jobs` in flight. Afterwards the root
// directory gets sweep.csv (one row per run) and fit.csv (power-law fits of
// the modulated energy and the dictionary distance against N).
std::vector<RunSummary> run_coupled(const ExperimentConfig& cfg,
                                    const std::filesystem::path& out, int jobs);

// Particles plus transported background only. Writes config.echo,
// version.txt, micro_energy.csv (step,t,kinetic,interaction,total),
// micro_trajectory.csv and micro_diagnostics.csv
// (step,t,mass_omega,support_omega,particle_radius,min_pair_distance).
RunSummary run_micro_only(const ExperimentConfig& cfg,
                          const std::filesystem::path& dir);

// Continuum system only. Writes config.echo, version.txt and
// macro_diagnostics.csv; rows after every step so the support bound can be
// checked against the logged speeds.
RunSummary run_macro_only(const ExperimentConfig& cfg,
                          const std::filesystem::path& dir);

// Least-squares fit y ~ C * N^(-beta) through the points with y > 0.
// Fewer than two usable points leaves valid = false instead of raising:
// a sweep that produces nonpositive values is an answer, not an error.
struct FitResult {
    double beta = 0.0;
    double C = 0.0;
    double r_squared = 0.0;
    bool valid = false;
    int points_used = 0;
};
FitResult fit_decay(const std::vector<double>& N, const std::vector<double>& y);

} // namespace spray
