#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spraylab/config.hpp"
#include "spraylab/errors.hpp"
#include "spraylab/experiment.hpp"
#include "spraylab/grid.hpp"
#include "spraylab/interp.hpp"
#include "spraylab/sampling.hpp"

using namespace spray;
namespace fs = std::filesystem;

namespace {

GridField bump_field(const Grid& grid, double radius, double amplitude, Vec2 center = {}) {
    GridField f = GridField::scalar(grid);
    for (int iy = 0; iy < grid.n; ++iy)
        for (int ix = 0; ix < grid.n; ++ix) {
            const double s = norm2(grid.center(ix, iy) - center) / (radius * radius);
            if (s < 1.0) f.at(ix, iy) = amplitude * std::exp(-s / (1.0 - s));
        }
    return f;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(bool(is));
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

long line_count(const fs::path& p) {
    std::ifstream is(p);
    REQUIRE(bool(is));
    long rows = 0;
    std::string line;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    return rows;
}

fs::path fresh_dir(const std::string& leaf) {
    const fs::path dir = fs::temp_directory_path() / "spraylab_harness_tests" / leaf;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const char* kMicroConfig =
    "[domain]\n"
    "half_width = 2\n"
    "n = 32\n"
    "[time]\n"
    "dt = 1e-3\n"
    "t_final = 0.02\n"
    "[omega0]\n"
    "kind = annulus\n"
    "r0 = 0.7\n"
    "width = 0.2\n"
    "amplitude = 0.5\n"
    "[rho0]\n"
    "kind = disk\n"
    "radius = 0.25\n"
    "mass = 1\n"
    "[particles]\n"
    "n_list = 4\n"
    "scheme = halton\n"
    "seed = 11\n"
    "[energy]\n"
    "cadence = 1\n";

} // namespace

TEST_CASE("config text parses into the documented fields") {
    const std::string text =
        "# full tour\n"
        "[domain]\n"
        "half_width = 1.5\n"
        "n = 64\n"
        "[time]\n"
        "dt = 5e-3\n"
        "t_final = 0.5  ; trailing comment\n"
        "cfl = 0.8\n"
        "[micro]\n"
        "blob_eps_factor = 1.5\n"
        "[omega0]\n"
        "kind = bump\n"
        "radius = 0.8\n"
        "mass = 0.4\n"
        "[rho0]\n"
        "kind = plateau\n"
        "r0 = 0.3\n"
        "width = 0.04\n"
        "center_x = 0.1\n"
        "mass = 1\n"
        "[v0]\n"
        "kind = constant\n"
        "cx = 0.2\n"
        "cy = -0.1\n"
        "[particles]\n"
        "n_list = 64, 256, 1024\n"
        "scheme = iid\n"
        "seed = 42\n"
        "omega_perturb = 0.01\n"
        "[energy]\n"
        "c0 = 2\n"
        "dict_k = 3\n"
        "cadence = 5\n"
        "[output]\n"
        "snapshots = 1\n"
        "snapshot_cadence = 50\n";
    ExperimentConfig c = parse_config_text(text);
    CHECK(c.half_width == 1.5);
    CHECK(c.n == 64);
    CHECK(c.dt == 5e-3);
    CHECK(c.t_final == 0.5);
    CHECK(c.cfl == 0.8);
    CHECK(c.blob_eps_factor == 1.5);
    CHECK(c.omega0.kind == "bump");
    CHECK(c.omega0.radius == 0.8);
    CHECK(c.omega0.has_mass);
    CHECK(c.omega0.mass == 0.4);
    CHECK(c.rho0.kind == "plateau");
    CHECK(c.rho0.r0 == 0.3);
    CHECK(c.rho0.width == 0.04);
    CHECK(c.rho0.center_x == 0.1);
    CHECK(c.v0.kind == "constant");
    CHECK(c.v0.cx == 0.2);
    CHECK(c.v0.cy == -0.1);
    CHECK(c.n_list == std::vector<int>{64, 256, 1024});
    CHECK(c.scheme == "iid");
    CHECK(c.seed == 42);
    CHECK(c.omega_perturb == 0.01);
    CHECK(c.c0 == 2.0);
    CHECK(c.dict_k == 3);
    CHECK(c.cadence == 5);
    CHECK(c.snapshots);
    CHECK(c.snapshot_cadence == 50);
    CHECK(c.raw_text == text);
}

TEST_CASE("malformed configs are rejected with the reason") {
    auto bad = [](const std::string& text) {
        CHECK_THROWS_AS(parse_config_text(text), ConfigError);
    };
    bad("[domain\nn = 32\n");                        // unterminated section
    bad("[domain]\nno_equals_here\n");               // missing =
    bad("[domain]\n= 3\n");                          // empty key
    bad("[domain]\nn = 32\nn = 64\n");               // duplicate
    bad("[domain]\nn = 24\n");                       // not a power of two
    bad("[domain]\nhalf_width = -1\n");              // bad geometry
    bad("[time]\ndt = abc\n");                       // malformed number
    bad("[time]\ndt = -1e-3\n");                     // nonpositive dt
    bad("[time]\ncfl = 3\n");                        // cfl out of range
    bad("[mystery]\nx = 1\n");                       // unknown key
    bad("[particles]\nscheme = sobol\n");            // unknown scheme
    bad("[particles]\nn_list = 64, 32\n");           // not increasing
    bad("[particles]\nn_list = 64, bogus\n");        // bad entry
    bad("[omega0]\nkind = gaussian\n");              // unknown profile
    bad("[v0]\nkind = swirl\n");                     // unknown v0
    bad("[energy]\ndict_k = 11\n");                  // dictionary order
    bad("[energy]\ncadence = 0\n");                  // cadence
    bad("[micro]\nblob_eps_factor = 0\n");           // blob width
    CHECK_THROWS_AS(parse_scheme("latin"), ConfigError);
}

TEST_CASE("ring profile is flat on the band and decays exponentially off it") {
    Grid g(2.5, 256);
    ProfileSpec spec;
    spec.kind = "ring";
    spec.r0 = 1.6;
    spec.radius = 0.12;
    spec.width = 0.02;
    spec.amplitude = 0.7;
    GridField f = build_profile(spec, g);

    // walk one row of cells and compare against the documented shape at the
    // exact center radius of each cell
    const int iy = g.n / 2;
    int flat = 0, skirt = 0, hole = 0;
    for (int ix = 0; ix < g.n; ++ix) {
        const double r = norm(g.center(ix, iy));
        const double s = (std::fabs(r - spec.r0) - spec.radius) / spec.width;
        double want = 0.0;
        if (s <= 0.0) {
            want = spec.amplitude;
            ++flat;
        } else if (s < 30.0) {
            want = spec.amplitude * std::exp(-s);
            ++skirt;
        } else {
            ++hole;
        }
        CHECK(f.at(ix, iy) == doctest::Approx(want).epsilon(1e-12));
    }
    CHECK(flat >= 10);
    CHECK(skirt >= 10);
    CHECK(hole >= 10);
    CHECK(integrate(f) > 0.0);
}

TEST_CASE("lattice samples of a symmetric density are symmetric") {
    Grid g(2.0, 64);
    GridField rho = bump_field(g, 1.0, 1.0);
    std::vector<Vec2> q = sample_positions(rho, 36, SampleScheme::lattice, 3);
    REQUIRE(int(q.size()) == 36);
    for (const Vec2& a : q) {
        double best = 1e30;
        for (const Vec2& b : q) best = std::min(best, norm(a + b));
        CHECK(best <= 1e-9);
    }
}

TEST_CASE("samples follow the density mass and stay on its support") {
    Grid g(2.0, 64);
    GridField rho = GridField::scalar(g);
    for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix)
            if (norm(g.center(ix, iy)) < 1.0) rho.at(ix, iy) = 1.0;

    std::vector<Vec2> q = sample_positions(rho, 400, SampleScheme::lattice, 5);
    int left = 0;
    Vec2 mean{};
    for (const Vec2& x : q) {
        CHECK(norm(x) <= 1.0 + g.spacing());
        if (x.x < 0.0) ++left;
        mean = mean + x;
    }
    mean = (1.0 / double(q.size())) * mean;
    CHECK(std::fabs(left / 400.0 - 0.5) <= 0.05);
    CHECK(norm(mean) <= 0.02);
}

TEST_CASE("sampling schemes differ in how they use the seed") {
    Grid g(2.0, 32);
    GridField rho = bump_field(g, 1.0, 1.0);

    std::vector<Vec2> h1 = sample_positions(rho, 25, SampleScheme::halton, 1);
    std::vector<Vec2> h2 = sample_positions(rho, 25, SampleScheme::halton, 999);
    REQUIRE(h1.size() == h2.size());
    for (std::size_t i = 0; i < h1.size(); ++i) {
        CHECK(h1[i].x == h2[i].x);
        CHECK(h1[i].y == h2[i].y);
    }

    std::vector<Vec2> a = sample_positions(rho, 25, SampleScheme::iid, 7);
    std::vector<Vec2> b = sample_positions(rho, 25, SampleScheme::iid, 7);
    std::vector<Vec2> c = sample_positions(rho, 25, SampleScheme::iid, 8);
    bool same = true, differ = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        same = same && a[i].x == b[i].x && a[i].y == b[i].y;
        differ = differ || a[i].x != c[i].x || a[i].y != c[i].y;
    }
    CHECK(same);
    CHECK(differ);
}

TEST_CASE("exclusion zones deflect or exhaust the sampler") {
    Grid g(2.0, 64);
    GridField rho = GridField::scalar(g);
    for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix)
            if (norm(g.center(ix, iy)) < 1.0) rho.at(ix, iy) = 1.0;
    GridField hole = bump_field(g, 0.5, 1.0);

    bool overlapped = false;
    std::vector<Vec2> q = sample_positions(rho, 100, SampleScheme::halton, 1, &hole, &overlapped);
    CHECK(overlapped);
    for (const Vec2& x : q) CHECK(std::fabs(interpolate_scalar(hole, x)) <= 1e-12);

    // the hole swallowing the whole support must terminate, not spin
    GridField cover = bump_field(g, 1.4, 1.0);
    CHECK_THROWS_AS(sample_positions(rho, 16, SampleScheme::halton, 1, &cover, &overlapped),
                    ConfigError);

    GridField zero = GridField::scalar(g);
    CHECK_THROWS_AS(sample_positions(zero, 4, SampleScheme::iid, 1), ConfigError);
}

TEST_CASE("power-law fits recover exact decay and refuse degenerate input") {
    const std::vector<double> N = {64, 256, 1024, 4096};
    std::vector<double> y;
    for (double n : N) y.push_back(3.0 * std::pow(n, -0.75));
    FitResult f = fit_decay(N, y);
    CHECK(f.valid);
    CHECK(f.points_used == 4);
    CHECK(f.beta == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(f.C == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));

    FitResult bad = fit_decay(N, {1.0, -2.0, 0.0, -0.5});
    CHECK(!bad.valid);
    CHECK(bad.points_used == 1);

    FitResult growth = fit_decay(N, {1.0, 2.0, 4.0, 8.0});
    CHECK(growth.valid);
    CHECK(growth.beta < 0.0);
}

TEST_CASE("micro runs are reproducible byte for byte") {
    ExperimentConfig cfg = parse_config_text(kMicroConfig);
    const fs::path a = fresh_dir("micro_a");
    const fs::path b = fresh_dir("micro_b");

    RunSummary ra = run_micro_only(cfg, a);
    RunSummary rb = run_micro_only(cfg, b);
    CHECK(!ra.aborted);
    CHECK(ra.N == 4);
    CHECK(ra.seed == 15);
    CHECK(ra.steps_completed == 20);
    CHECK(!ra.overlap_warning);
    CHECK(ra.t_end == doctest::Approx(0.02).epsilon(1e-12));
    (void)rb;

    for (const char* name :
         {"micro_energy.csv", "micro_trajectory.csv", "micro_diagnostics.csv"}) {
        CHECK(slurp(a / name) == slurp(b / name));
        CHECK(line_count(a / name) >= 2);
    }
    CHECK(slurp(a / "config.echo") == cfg.raw_text);
    CHECK(slurp(a / "version.txt").find(kVersionString) != std::string::npos);
}

TEST_CASE("an aborted run still leaves parseable output behind") {
    ExperimentConfig cfg = parse_config_text(kMicroConfig);
    cfg.dt = 0.2; // far past the admissible step at this resolution
    cfg.t_final = 0.4;
    const fs::path dir = fresh_dir("micro_abort");
    RunSummary r = run_micro_only(cfg, dir);
    CHECK(r.aborted);
    CHECK(r.steps_completed == 0);
    CHECK(!r.abort_reason.empty());
    // header plus the step-0 row survive the abort
    CHECK(line_count(dir / "micro_energy.csv") == 2);
    CHECK(line_count(dir / "micro_trajectory.csv") == 1 + 4);
}

TEST_CASE("coupled runs are reproducible and keep their running extremes") {
    ExperimentConfig cfg = parse_config_text(kMicroConfig);
    cfg.t_final = 0.01;
    const fs::path a = fresh_dir("coupled_a");
    const fs::path b = fresh_dir("coupled_b");

    RunSummary ra = run_coupled_single(cfg, 4, a);
    RunSummary rb = run_coupled_single(cfg, 4, b);
    CHECK(!ra.aborted);
    CHECK(ra.steps_completed == 10);
    CHECK(int(ra.H_per_step.size()) == 11);
    CHECK(ra.H_tilde_sup >= ra.first.H_tilde);
    CHECK(ra.H_tilde_sup >= ra.last.H_tilde);
    (void)rb;

    for (const char* name : {"energy.csv", "coercivity.csv", "macro_diagnostics.csv",
                             "micro_trajectory.csv"}) {
        CHECK(slurp(a / name) == slurp(b / name));
    }
    // energy rows land every step: header, steps 0..10
    CHECK(line_count(a / "energy.csv") == 12);
}
