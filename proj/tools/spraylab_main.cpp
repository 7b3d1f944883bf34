#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spraylab/csv.hpp"
#include "spraylab/errors.hpp"
#include "spraylab/experiment.hpp"
#include "spraylab/field_io.hpp"

namespace fs = std::filesystem;
using namespace spray;

namespace {

ExperimentConfig load_config(const std::string& path, std::uint64_t seed, bool seed_set) {
    ExperimentConfig cfg = parse_config_file(path);
    if (seed_set) cfg.seed = seed;
    return cfg;
}

int report_outcome(const RunSummary& sum, const fs::path& dir) {
    if (sum.aborted) {
        std::fprintf(stderr, "run aborted at t = %.6g: %s\n", sum.abort_time,
                     sum.abort_reason.c_str());
        std::fprintf(stderr, "partial logs kept in %s\n", dir.string().c_str());
        return 3;
    }
    std::printf("run complete: %d steps to t = %.6g, logs in %s\n", sum.steps_completed,
                sum.t_end, dir.string().c_str());
    return 0;
}

// ---- check: invariants any finished run directory must satisfy ----

struct CheckLog {
    bool all_ok = true;
    bool any_file = false;
    void line(bool ok, const std::string& what) {
        std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", what.c_str());
        all_ok = all_ok && ok;
    }
};

void check_macro_diagnostics(const fs::path& dir, const ExperimentConfig& cfg, CheckLog& log) {
    const CsvTable tab = read_csv(dir / "macro_diagnostics.csv");
    if (tab.rows.empty()) {
        log.line(false, "macro_diagnostics.csv has no rows");
        return;
    }
    const int ct = tab.column("t");
    const int cmr = tab.column("mass_rho");
    const int cmo = tab.column("mass_omega");

    for (const char* name : {"mass_rho", "mass_omega"}) {
        const int c = std::string(name) == "mass_rho" ? cmr : cmo;
        const double m0 = tab.rows.front()[c];
        double worst = 0.0;
        for (const auto& row : tab.rows) worst = std::max(worst, std::abs(row[c] - m0));
        const bool ok = worst <= 1e-8 * (1.0 + std::abs(m0));
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s constant (max drift %.3g)", name, worst);
        log.line(ok, buf);
    }

    std::vector<SupportRow> rows;
    const int csr = tab.column("support_rho");
    const int cso = tab.column("support_omega");
    const int cmv = tab.column("max_v");
    const int cmV = tab.column("max_V");
    for (const auto& r : tab.rows)
        rows.push_back({r[ct], r[csr], r[cso], r[cmv], r[cmV]});
    const double h = 2.0 * cfg.half_width / cfg.n;
    const SupportCheck sc = check_support_bound(rows, h);
    char buf[160];
    std::snprintf(buf, sizeof buf, "support growth within logged speeds (excess %.3g)",
                  sc.max_excess);
    log.line(sc.ok, buf);
}

void check_energy_log(const fs::path& dir, CheckLog& log) {
    const CsvTable tab = read_csv(dir / "energy.csv");
    if (tab.rows.empty()) {
        log.line(false, "energy.csv has no rows");
        return;
    }
    const std::vector<std::string> finite_cols = {"t",  "T1", "T2", "T3",            "T4",
                                                  "T5", "T6", "H",  "coulomb_block", "H_tilde"};
    bool finite_ok = true;
    for (const auto& name : finite_cols) {
        const int c = tab.column(name);
        for (const auto& row : tab.rows) finite_ok = finite_ok && std::isfinite(row[c]);
    }
    log.line(finite_ok, "energy columns finite");

    const int cb = tab.column("coulomb_block");
    const int c6 = tab.column("T6");
    const int c1 = tab.column("T1");
    const int c5 = tab.column("T5");
    const int cH = tab.column("H");
    bool lower_ok = true, sum_ok = true;
    for (const auto& row : tab.rows) {
        lower_ok = lower_ok && row[cb] + row[c6] >= -1e-12;
        const double rebuilt = row[c1] + row[cb] + row[c5] + row[c6];
        sum_ok = sum_ok && std::abs(rebuilt - row[cH]) <= 1e-12 * (1.0 + std::abs(row[cH]));
    }
    log.line(lower_ok, "coulomb block + T6 nonnegative");
    log.line(sum_ok, "H matches its own terms");
}

void check_micro_energy(const fs::path& dir, CheckLog& log) {
    const CsvTable tab = read_csv(dir / "micro_energy.csv");
    if (tab.rows.empty()) {
        log.line(false, "micro_energy.csv has no rows");
        return;
    }
    const int c = tab.column("total");
    bool ok = true;
    for (const auto& row : tab.rows) ok = ok && std::isfinite(row[c]);
    const double e0 = tab.rows.front()[c];
    double worst = 0.0;
    for (const auto& row : tab.rows) worst = std::max(worst, std::abs(row[c] - e0));
    char buf[160];
    std::snprintf(buf, sizeof buf, "particle energy finite (drift %.3g over the run)", worst);
    log.line(ok, buf);
}

int run_check(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw ConfigError("not a run directory: " + dir.string());
    CheckLog log;
    if (fs::exists(dir / "macro_diagnostics.csv")) {
        log.any_file = true;
        const ExperimentConfig cfg = parse_config_file(dir / "config.echo");
        check_macro_diagnostics(dir, cfg, log);
    }
    if (fs::exists(dir / "energy.csv")) {
        log.any_file = true;
        check_energy_log(dir, log);
    }
    if (fs::exists(dir / "micro_energy.csv")) {
        log.any_file = true;
        check_micro_energy(dir, log);
    }
    if (!log.any_file) throw ConfigError("no recognized logs in " + dir.string());
    if (!log.all_ok) throw InvariantViolation("run directory failed checks: " + dir.string());
    return 0;
}

// ---- energy-report: recompute the breakdown from snapshots ----

long snapshot_step(const std::string& name) {
    const std::string prefix = "omega_macro_";
    const std::string suffix = ".field";
    if (name.size() <= prefix.size() + suffix.size()) return -1;
    if (name.rfind(prefix, 0) != 0) return -1;
    if (name.substr(name.size() - suffix.size()) != suffix) return -1;
    const std::string digits = name.substr(prefix.size(), name.size() - prefix.size() - suffix.size());
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) return -1;
    return std::stol(digits);
}

int run_energy_report(const fs::path& dir) {
    const ExperimentConfig cfg = parse_config_file(dir / "config.echo");
    const fs::path snap = dir / "snapshots";
    if (!fs::is_directory(snap))
        throw ConfigError("run has no snapshots directory: " + snap.string());

    std::vector<long> steps;
    for (const auto& entry : fs::directory_iterator(snap)) {
        const long s = snapshot_step(entry.path().filename().string());
        if (s >= 0) steps.push_back(s);
    }
    std::sort(steps.begin(), steps.end());
    if (steps.empty()) throw ConfigError("no snapshots found in " + snap.string());

    const CsvTable traj = read_csv(dir / "micro_trajectory.csv");
    const int cs = traj.column("step");
    const int ct = traj.column("t");
    const int cqx = traj.column("qx"), cqy = traj.column("qy");
    const int cpx = traj.column("px"), cpy = traj.column("py");

    const CsvTable elog = read_csv(dir / "energy.csv");
    const int es = elog.column("step");
    std::map<long, const std::vector<double>*> energy_by_step;
    for (const auto& row : elog.rows) energy_by_step[std::lround(row[es])] = &row;

    CsvWriter out(dir / "energy_recheck.csv",
                  {"step", "t", "H_tilde_logged", "H_tilde_recomputed", "gap"});
    const int eh = elog.column("H_tilde");
    double worst = 0.0;
    for (const long s : steps) {
        char tag[16];
        std::snprintf(tag, sizeof tag, "%06ld", s);
        MacroState mac;
        mac.omega = read_field(snap / (std::string("omega_macro_") + tag + ".field"));
        mac.rho = read_field(snap / (std::string("rho_") + tag + ".field"));
        mac.v = read_field(snap / (std::string("v_") + tag + ".field"));
        MicroState mic;
        mic.omega = read_field(snap / (std::string("omega_micro_") + tag + ".field"));
        double t = 0.0;
        for (const auto& row : traj.rows)
            if (std::lround(row[cs]) == s) {
                mic.particles.q.push_back({row[cqx], row[cqy]});
                mic.particles.p.push_back({row[cpx], row[cpy]});
                t = row[ct];
            }
        if (mic.particles.q.empty())
            throw ConfigError("no trajectory rows for snapshot step " + std::to_string(s));
        mac.t = mic.t = t;

        PoissonSolver solver(mac.omega.grid());
        BNPolicy policy{cfg.c0, 0};
        const EnergyBreakdown eb = modulated_energy(solver, mac, mic, policy);

        const auto it = energy_by_step.find(s);
        if (it == energy_by_step.end())
            throw ConfigError("no energy row for snapshot step " + std::to_string(s));
        const double logged = (*it->second)[eh];
        const double gap = std::abs(eb.H_tilde - logged);
        worst = std::max(worst, gap / (1.0 + std::abs(logged)));
        out.row({double(s), t, logged, eb.H_tilde, gap});
    }
    std::printf("rechecked %zu snapshots, worst relative gap %.3g\n", steps.size(), worst);
    if (worst > 1e-12)
        throw InvariantViolation("stored energies disagree with the snapshot states");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gyroscopic spray laboratory"};
    app.set_version_flag("--version", kVersionString);
    app.require_subcommand(1);

    std::string config_path, out_dir, run_dir;
    std::uint64_t seed = 0;
    int jobs = 1;

    auto add_sim_options = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "config file")->required();
        cmd->add_option("--out", out_dir, "output directory")->required();
        cmd->add_option("--seed", seed, "override the config seed");
    };
    CLI::App* micro = app.add_subcommand("simulate-micro", "particles plus transported background");
    add_sim_options(micro);
    CLI::App* macro_cmd = app.add_subcommand("simulate-macro", "continuum system only");
    add_sim_options(macro_cmd);
    CLI::App* conv = app.add_subcommand("converge", "coupled runs over the particle sweep");
    add_sim_options(conv);
    conv->add_option("--jobs", jobs, "runs in flight at once")->check(CLI::Range(1, 64));

    CLI::App* report = app.add_subcommand("energy-report", "recompute energies from snapshots");
    report->add_option("--run", run_dir, "run directory")->required();
    CLI::App* check = app.add_subcommand("check", "verify invariants of a finished run");
    check->add_option("--run", run_dir, "run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (micro->parsed()) {
            const ExperimentConfig cfg = load_config(config_path, seed, micro->count("--seed") > 0);
            return report_outcome(run_micro_only(cfg, out_dir), out_dir);
        }
        if (macro_cmd->parsed()) {
            const ExperimentConfig cfg =
                load_config(config_path, seed, macro_cmd->count("--seed") > 0);
            return report_outcome(run_macro_only(cfg, out_dir), out_dir);
        }
        if (conv->parsed()) {
            const ExperimentConfig cfg = load_config(config_path, seed, conv->count("--seed") > 0);
            const std::vector<RunSummary> runs = run_coupled(cfg, out_dir, jobs);
            int rc = 0;
            for (const RunSummary& r : runs) {
                std::printf("N = %d: H(0) = %.6g, H(T) = %.6g, H_tilde(T) = %.6g%s\n", r.N,
                            r.first.H, r.last.H, r.last.H_tilde,
                            r.aborted ? "  [aborted]" : "");
                if (r.aborted) rc = 3;
            }
            return rc;
        }
        if (report->parsed()) return run_energy_report(run_dir);
        if (check->parsed()) return run_check(run_dir);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const NumericalAbort& e) {
        std::fprintf(stderr, "numerical abort: %s\n", e.what());
        return 3;
    } catch (const InvariantViolation& e) {
        std::fprintf(stderr, "invariant violation: %s\n", e.what());
        return 4;
    }
    return 0;
}
