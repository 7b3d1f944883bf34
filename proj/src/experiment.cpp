#include "spraylab/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <thread>

#include "spraylab/biot_savart.hpp"
#include "spraylab/csv.hpp"
#include "spraylab/errors.hpp"
#include "spraylab/field_io.hpp"
#include "spraylab/interp.hpp"
#include "spraylab/sampling.hpp"

namespace spray {

namespace fs = std::filesystem;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void write_preamble(const fs::path& dir, const ExperimentConfig& cfg) {
    fs::create_directories(dir);
    std::ofstream echo(dir / "config.echo", std::ios::trunc | std::ios::binary);
    if (!echo) throw ConfigError("cannot write " + (dir / "config.echo").string());
    echo << cfg.raw_text;
    std::ofstream ver(dir / "version.txt", std::ios::trunc);
    if (!ver) throw ConfigError("cannot write " + (dir / "version.txt").string());
    ver << kVersionString << "\n";
}

long step_count(const ExperimentConfig& cfg) {
    const long s = std::lround(cfg.t_final / cfg.dt);
    if (std::abs(double(s) * cfg.dt - cfg.t_final) > 1e-9 * std::max(1.0, cfg.t_final))
        throw ConfigError("t_final must be a whole number of dt steps");
    return s;
}

// The convolution solver needs an empty band of cells along the box edge;
// fail on bad input before the run starts rather than one step in.
void require_interior_support(const GridField& f, const char* name) {
    const double peak = linf_norm(f);
    if (peak > 0.0 && boundary_band_max(f, 2.0 * f.grid().spacing()) > 1e-12 * peak)
        throw ConfigError(std::string(name) + " reaches the edge band; enlarge the box");
}

// Supports grow at most linearly in the advecting speed. Project that growth
// from the initial speeds and refuse runs that are already doomed to hit the
// edge band; speeds can still drift upward mid-run, so the solver keeps its
// own check as the backstop.
void require_support_budget(const ExperimentConfig& cfg, const GridField& f,
                            double speed, const char* name) {
    const double h = f.grid().spacing();
    const double projected = support_radius(f) + cfg.t_final * speed + 4.0 * h;
    if (projected > cfg.half_width - 2.0 * h)
        throw ConfigError(std::string(name) + " is projected to reach the edge band "
                          "before t_final; enlarge the box or shorten the run");
}

GridField perturbed(const GridField& omega0, double amp) {
    if (amp == 0.0) return omega0;
    GridField out = omega0;
    const Grid& g = omega0.grid();
    for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix) {
            const Vec2 x = g.center(ix, iy);
            const double mode = std::cos(std::numbers::pi * x.x / g.half_width) *
                                std::cos(std::numbers::pi * x.y / g.half_width);
            out.at(ix, iy) *= 1.0 + amp * mode;
        }
    return out;
}

struct InitialData {
    GridField omega0;
    GridField rho0;
    GridField v0;
    ParticleSet particles;
    bool overlap_warning = false;
};

InitialData build_initial(const ExperimentConfig& cfg, const Grid& grid,
                          PoissonSolver& solver, int N, std::uint64_t seed) {
    InitialData init;
    init.omega0 = build_profile(cfg.omega0, grid);
    init.rho0 = build_profile(cfg.rho0, grid);
    require_interior_support(init.omega0, "initial omega");
    require_interior_support(init.rho0, "initial rho");
    init.v0 = build_v0(cfg.v0, grid, solver, init.omega0 + init.rho0);
    if (N > 0) {
        init.particles.q = sample_positions(init.rho0, N, parse_scheme(cfg.scheme), seed,
                                            &init.omega0, &init.overlap_warning);
        init.particles.p.reserve(N);
        for (const Vec2& q : init.particles.q)
            init.particles.p.push_back(interpolate_vec(init.v0, q));
    }
    return init;
}

double max_vec_norm(const GridField& f) {
    double m = 0.0;
    for (int iy = 0; iy < f.n(); ++iy)
        for (int ix = 0; ix < f.n(); ++ix) m = std::max(m, norm(f.vec_at(ix, iy)));
    return m;
}

double min_pair_distance(const std::vector<Vec2>& q) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < q.size(); ++a)
        for (std::size_t b = a + 1; b < q.size(); ++b)
            best = std::min(best, norm(q[a] - q[b]));
    return best;
}

double particle_radius(const std::vector<Vec2>& q) {
    double r = 0.0;
    for (const Vec2& x : q) r = std::max(r, norm(x));
    return r;
}

std::string padded(long s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06ld", s);
    return buf;
}

void append_trajectory(CsvWriter& w, long step, double t, const ParticleSet& ps) {
    for (int i = 0; i < ps.size(); ++i)
        w.row({double(step), t, double(i), ps.q[i].x, ps.q[i].y, ps.p[i].x, ps.p[i].y});
}

const std::vector<std::string> kTrajectoryHeader = {"step", "t",  "particle", "qx",
                                                    "qy",   "px", "py"};

} // namespace

RunSummary run_coupled_single(const ExperimentConfig& cfg, int N, const fs::path& dir) {
    if (N < 1) throw ConfigError("coupled run needs at least one particle");
    write_preamble(dir, cfg);
    const Grid grid(cfg.half_width, cfg.n);
    PoissonSolver solver(grid);
    const long steps = step_count(cfg);
    const std::uint64_t seed = cfg.seed + std::uint64_t(N);

    InitialData init = build_initial(cfg, grid, solver, N, seed);
    {
        const GridField V0 = velocity_from_vorticity(solver, init.omega0 + init.rho0);
        const double speed = std::max(max_vec_norm(V0), max_vec_norm(init.v0));
        require_support_budget(cfg, init.omega0, speed, "omega");
        require_support_budget(cfg, init.rho0, speed, "rho");
    }
    MacroState mac{init.omega0, init.rho0, init.v0, 0.0};
    MicroState mic{perturbed(init.omega0, cfg.omega_perturb), std::move(init.particles), 0.0};
    const MicroParams mprm{cfg.blob_eps_factor, cfg.cfl, cfg.collision_floor_factor};
    const MacroParams kprm{cfg.cfl};
    BNPolicy policy{cfg.c0, 0};

    RunSummary sum;
    sum.N = N;
    sum.seed = seed;
    sum.overlap_warning = init.overlap_warning;

    std::vector<EnergyBreakdown> elog;
    std::vector<RateBreakdown> rates(steps + 1);
    std::vector<char> has_rate(steps + 1, 0);
    elog.reserve(steps + 1);

    CsvWriter coer(dir / "coercivity.csv",
                   {"step", "t", "dict_distance", "l2_omega_gap", "weak_rho_gap"});
    CsvWriter diag(dir / "macro_diagnostics.csv",
                   {"step", "t", "mass_rho", "mass_omega", "l2_omega", "support_rho",
                    "support_omega", "max_v", "max_V"});
    CsvWriter traj(dir / "micro_trajectory.csv", kTrajectoryHeader);
    if (cfg.snapshots) fs::create_directories(dir / "snapshots");

    auto reported = [&](long s) {
        if (s == 0 || s == steps || s % cfg.cadence == 0) return true;
        return cfg.snapshots && s % cfg.snapshot_cadence == 0;
    };

    auto log_state = [&](long s) {
        EnergyBreakdown eb = modulated_energy(solver, mac, mic, policy);
        elog.push_back(eb);
        sum.H_per_step.push_back(eb.H);
        if (!reported(s)) return;
        rates[s] = energy_rate(solver, mac, mic, mprm);
        has_rate[s] = 1;
        CoercivityReport cr = coercivity_report(mac, mic, cfg.dict_k);
        if (s == 0) sum.coercivity_first = cr;
        sum.coercivity_last = cr;
        coer.row({double(s), eb.t, cr.dict_distance, cr.l2_omega_gap, cr.weak_rho_gap});
        GridField V = velocity_from_vorticity(solver, mac.omega + mac.rho);
        diag.row({double(s), eb.t, integrate(mac.rho), integrate(mac.omega),
                  l2_norm(mac.omega), support_radius(mac.rho), support_radius(mac.omega),
                  max_vec_norm(mac.v), max_vec_norm(V)});
        append_trajectory(traj, s, eb.t, mic.particles);
        if (cfg.snapshots && (s % cfg.snapshot_cadence == 0 || s == steps)) {
            const fs::path snap = dir / "snapshots";
            write_field(snap / ("omega_macro_" + padded(s) + ".field"), mac.omega);
            write_field(snap / ("rho_" + padded(s) + ".field"), mac.rho);
            write_field(snap / ("v_" + padded(s) + ".field"), mac.v);
            write_field(snap / ("omega_micro_" + padded(s) + ".field"), mic.omega);
        }
    };

    try {
        log_state(0);
        for (long s = 0; s < steps; ++s) {
            step_macro(solver, mac, cfg.dt, kprm);
            step_micro(solver, mic, cfg.dt, mprm);
            log_state(s + 1);
        }
    } catch (const NumericalAbort& e) {
        sum.aborted = true;
        sum.abort_reason = e.what();
        sum.abort_time = e.t >= 0.0 ? e.t : std::max(mac.t, mic.t);
    }

    CsvWriter en(dir / "energy.csv",
                 {"step", "t", "T1", "T2", "T3", "T4", "T5", "T6", "coulomb_block", "H",
                  "H_tilde", "R1", "R2", "R3", "rate_sum", "H_rate_fd"});
    for (std::size_t s = 0; s < elog.size(); ++s) {
        const EnergyBreakdown& e = elog[s];
        double fd = kNan;
        if (s > 0 && s + 1 < elog.size()) fd = (elog[s + 1].H - elog[s - 1].H) / (2.0 * cfg.dt);
        const bool r = has_rate[s];
        en.row({double(s), e.t, e.T1, e.T2, e.T3, e.T4, e.T5, e.T6, e.coulomb_block, e.H,
                e.H_tilde, r ? rates[s].R1 : kNan, r ? rates[s].R2 : kNan,
                r ? rates[s].R3 : kNan, r ? rates[s].sum : kNan, fd});
    }

    if (!elog.empty()) {
        sum.first = elog.front();
        sum.last = elog.back();
        sum.steps_completed = int(elog.size()) - 1;
        sum.t_end = elog.back().t;
        sum.H_tilde_sup = elog.front().H_tilde;
        for (const EnergyBreakdown& e : elog)
            sum.H_tilde_sup = std::max(sum.H_tilde_sup, e.H_tilde);
    }
    sum.escalations = policy.escalations;
    return sum;
}

std::vector<RunSummary> run_coupled(const ExperimentConfig& cfg, const fs::path& out,
                                    int jobs) {
    if (cfg.n_list.empty()) throw ConfigError("sweep needs at least one particle count");
    write_preamble(out, cfg);

    const std::size_t runs = cfg.n_list.size();
    std::vector<RunSummary> results(runs);
    std::vector<std::exception_ptr> errors(runs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < runs; i = next.fetch_add(1)) {
            try {
                const int N = cfg.n_list[i];
                results[i] = run_coupled_single(cfg, N, out / ("N_" + std::to_string(N)));
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int lanes = std::max(1, std::min<int>(jobs, int(runs)));
    if (lanes == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < lanes; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);

    CsvWriter sweep(out / "sweep.csv",
                    {"N", "seed", "steps", "aborted", "t_end", "H_0", "H_T", "H_tilde_0",
                     "H_tilde_T", "H_tilde_sup", "T1_T", "T5_T", "coulomb_T", "T6_T", "dict_0",
                     "dict_T", "l2_gap_T", "weak_rho_T", "escalations"});
    std::vector<double> Ns, ht0, htT, hts, d0, dT;
    for (const RunSummary& r : results) {
        sweep.row({double(r.N), double(r.seed), double(r.steps_completed),
                   r.aborted ? 1.0 : 0.0, r.t_end, r.first.H, r.last.H, r.first.H_tilde,
                   r.last.H_tilde, r.H_tilde_sup, r.last.T1, r.last.T5, r.last.coulomb_block,
                   r.last.T6, r.coercivity_first.dict_distance, r.coercivity_last.dict_distance,
                   r.coercivity_last.l2_omega_gap, r.coercivity_last.weak_rho_gap,
                   double(r.escalations)});
        if (!r.aborted) {
            Ns.push_back(double(r.N));
            ht0.push_back(r.first.H_tilde);
            htT.push_back(r.last.H_tilde);
            hts.push_back(r.H_tilde_sup);
            d0.push_back(r.coercivity_first.dict_distance);
            dT.push_back(r.coercivity_last.dict_distance);
        }
    }

    std::ofstream fit(out / "fit.csv", std::ios::trunc);
    if (!fit) throw ConfigError("cannot write " + (out / "fit.csv").string());
    fit << "quantity,valid,beta,C,r_squared,points_used\n";
    auto emit = [&](const char* name, const FitResult& f) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%.17g,%.17g,%d\n", name, f.valid ? 1 : 0,
                      f.beta, f.C, f.r_squared, f.points_used);
        fit << buf;
    };
    emit("H_tilde_initial", fit_decay(Ns, ht0));
    emit("H_tilde_final", fit_decay(Ns, htT));
    emit("H_tilde_sup", fit_decay(Ns, hts));
    emit("dict_initial", fit_decay(Ns, d0));
    emit("dict_final", fit_decay(Ns, dT));
    return results;
}

RunSummary run_micro_only(const ExperimentConfig& cfg, const fs::path& dir) {
    const int N = cfg.n_list.front();
    if (N < 1) throw ConfigError("micro run needs at least one particle");
    write_preamble(dir, cfg);
    const Grid grid(cfg.half_width, cfg.n);
    PoissonSolver solver(grid);
    const long steps = step_count(cfg);
    const std::uint64_t seed = cfg.seed + std::uint64_t(N);

    InitialData init = build_initial(cfg, grid, solver, N, seed);
    if (linf_norm(init.omega0) > 0.0) {
        const GridField V0 = velocity_from_vorticity(solver, init.omega0);
        require_support_budget(cfg, init.omega0, max_vec_norm(V0), "omega");
    }
    MicroState mic{perturbed(init.omega0, cfg.omega_perturb), std::move(init.particles), 0.0};
    const MicroParams mprm{cfg.blob_eps_factor, cfg.cfl, cfg.collision_floor_factor};

    RunSummary sum;
    sum.N = N;
    sum.seed = seed;
    sum.overlap_warning = init.overlap_warning;

    CsvWriter en(dir / "micro_energy.csv", {"step", "t", "kinetic", "interaction", "total"});
    CsvWriter diag(dir / "micro_diagnostics.csv",
                   {"step", "t", "mass_omega", "support_omega", "particle_radius",
                    "min_pair_distance"});
    CsvWriter traj(dir / "micro_trajectory.csv", kTrajectoryHeader);

    long completed = 0;
    auto log_state = [&](long s) {
        if (!(s == 0 || s == steps || s % cfg.cadence == 0)) return;
        MicroEnergy me = microscopic_energy(solver, mic);
        en.row({double(s), mic.t, me.kinetic, me.interaction, me.total});
        diag.row({double(s), mic.t, integrate(mic.omega), support_radius(mic.omega),
                  particle_radius(mic.particles.q), min_pair_distance(mic.particles.q)});
        append_trajectory(traj, s, mic.t, mic.particles);
    };

    try {
        log_state(0);
        for (long s = 0; s < steps; ++s) {
            step_micro(solver, mic, cfg.dt, mprm);
            completed = s + 1;
            log_state(completed);
        }
    } catch (const NumericalAbort& e) {
        sum.aborted = true;
        sum.abort_reason = e.what();
        sum.abort_time = e.t >= 0.0 ? e.t : mic.t;
    }
    sum.steps_completed = int(completed);
    sum.t_end = mic.t;
    return sum;
}

RunSummary run_macro_only(const ExperimentConfig& cfg, const fs::path& dir) {
    write_preamble(dir, cfg);
    const Grid grid(cfg.half_width, cfg.n);
    PoissonSolver solver(grid);
    const long steps = step_count(cfg);

    GridField omega0 = build_profile(cfg.omega0, grid);
    GridField rho0 = build_profile(cfg.rho0, grid);
    require_interior_support(omega0, "initial omega");
    require_interior_support(rho0, "initial rho");
    GridField v0 = build_v0(cfg.v0, grid, solver, omega0 + rho0);
    {
        const GridField V0 = velocity_from_vorticity(solver, omega0 + rho0);
        const double speed = std::max(max_vec_norm(V0), max_vec_norm(v0));
        require_support_budget(cfg, omega0, speed, "omega");
        require_support_budget(cfg, rho0, speed, "rho");
    }
    MacroState mac{std::move(omega0), std::move(rho0), std::move(v0), 0.0};
    const MacroParams kprm{cfg.cfl};

    RunSummary sum;
    CsvWriter diag(dir / "macro_diagnostics.csv",
                   {"step", "t", "mass_rho", "mass_omega", "l2_omega", "support_rho",
                    "support_omega", "max_v", "max_V"});
    if (cfg.snapshots) fs::create_directories(dir / "snapshots");

    long completed = 0;
    auto log_state = [&](long s) {
        GridField V = velocity_from_vorticity(solver, mac.omega + mac.rho);
        diag.row({double(s), mac.t, integrate(mac.rho), integrate(mac.omega),
                  l2_norm(mac.omega), support_radius(mac.rho), support_radius(mac.omega),
                  max_vec_norm(mac.v), max_vec_norm(V)});
        if (cfg.snapshots && (s % cfg.snapshot_cadence == 0 || s == steps)) {
            const fs::path snap = dir / "snapshots";
            write_field(snap / ("omega_macro_" + padded(s) + ".field"), mac.omega);
            write_field(snap / ("rho_" + padded(s) + ".field"), mac.rho);
            write_field(snap / ("v_" + padded(s) + ".field"), mac.v);
        }
    };

    try {
        log_state(0);
        for (long s = 0; s < steps; ++s) {
            step_macro(solver, mac, cfg.dt, kprm);
            completed = s + 1;
            log_state(completed);
        }
    } catch (const NumericalAbort& e) {
        sum.aborted = true;
        sum.abort_reason = e.what();
        sum.abort_time = e.t >= 0.0 ? e.t : mac.t;
    }
    sum.steps_completed = int(completed);
    sum.t_end = mac.t;
    return sum;
}

FitResult fit_decay(const std::vector<double>& N, const std::vector<double>& y) {
    if (N.size() != y.size()) throw ConfigError("fit inputs must have equal length");
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < N.size(); ++i)
        if (N[i] > 0.0 && y[i] > 0.0 && std::isfinite(N[i]) && std::isfinite(y[i])) {
            lx.push_back(std::log(N[i]));
            ly.push_back(std::log(y[i]));
        }
    FitResult f;
    f.points_used = int(lx.size());
    if (lx.size() < 2) return f;

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= double(lx.size());
    my /= double(lx.size());
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx <= 0.0) return f;

    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        const double r = ly[i] - (slope * lx[i] + intercept);
        ss_res += r * r;
        ss_tot += (ly[i] - my) * (ly[i] - my);
    }
    f.beta = -slope;
    f.C = std::exp(intercept);
    f.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    f.valid = true;
    return f;
}

} // namespace spray
