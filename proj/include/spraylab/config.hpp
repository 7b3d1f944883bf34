#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "spraylab/grid.hpp"
#include "spraylab/poisson.hpp"

namespace spray {

// Radial profile families for initial data. `mass`, when set, rescales the
// sampled shape so integrate() returns exactly that value; otherwise the
// shape is used at the given amplitude. The bump shapes use
// exp(-s^2/(1 - s^2)), smooth and compactly supported. `plateau` and `ring`
// trade smoothness for an exponential skirt whose per-cell decay the grid can
// resolve, which keeps amplitude-threshold support tracking tight.
struct ProfileSpec {
    std::string kind = "zero"; // zero | disk | bump | annulus | plateau | ring
    double center_x = 0.0;
    double center_y = 0.0;
    double radius = 1.0;   // disk/bump support radius; ring flat-top half-width
    double r0 = 0.7;       // annulus/ring centerline; plateau flat-top radius
    double width = 0.3;    // annulus half-width; plateau/ring skirt scale
    double amplitude = 1.0;
    bool has_mass = false;
    double mass = 0.0;
};

struct V0Spec {
    std::string kind = "zero"; // zero | constant | matched
    double cx = 0.0;
    double cy = 0.0;
};

struct ExperimentConfig {
    double half_width = 2.0;
    int n = 128;

    double dt = 1e-3;
    double t_final = 0.5;
    double cfl = 1.0;

    double blob_eps_factor = 2.0;
    double collision_floor_factor = 1e-10;

    ProfileSpec omega0;
    ProfileSpec rho0;
    V0Spec v0;

    std::vector<int> n_list{64};
    std::string scheme = "lattice"; // iid | lattice | halton
    std::uint64_t seed = 1;
    double omega_perturb = 0.0;

    double c0 = 1.0;
    int dict_k = 2;
    int cadence = 10;

    bool snapshots = false;
    int snapshot_cadence = 100;

    std::string raw_text; // echoed verbatim into the run directory
};

// Flat key=value sections; '#' and ';' start comments. Unknown sections or
// keys, malformed numbers, and out-of-range values raise ConfigError.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

// Sample the profile on the grid (and rescale to the requested mass).
GridField build_profile(const ProfileSpec& spec, const Grid& grid);

// Initial velocity field: zero, a constant, or the induced velocity of
// alpha0 = omega0 + rho0 ("matched").
GridField build_v0(const V0Spec& spec, const Grid& grid, PoissonSolver& solver,
                   const GridField& alpha0);

} // namespace spray
