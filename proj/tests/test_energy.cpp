#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "oracle_helpers.hpp"
#include "spraylab/biot_savart.hpp"
#include "spraylab/energy.hpp"
#include "spraylab/errors.hpp"
#include "spraylab/grid.hpp"
#include "spraylab/interp.hpp"
#include "spraylab/macro.hpp"
#include "spraylab/micro.hpp"
#include "spraylab/poisson.hpp"
#include "spraylab/sampling.hpp"

using namespace spray;

namespace {

constexpr double kPi = std::numbers::pi;

GridField plateau_field(const Grid& grid, double r0, double width, double amplitude,
                        Vec2 center = {}) {
    GridField f = GridField::scalar(grid);
    for (int iy = 0; iy < grid.n; ++iy)
        for (int ix = 0; ix < grid.n; ++ix) {
            const double s = (norm(grid.center(ix, iy) - center) - r0) / width;
            if (s <= 0.0)
                f.at(ix, iy) = amplitude;
            else if (s < 30.0)
                f.at(ix, iy) = amplitude * std::exp(-s);
        }
    return f;
}

GridField bump_field(const Grid& grid, double radius, double amplitude) {
    GridField f = GridField::scalar(grid);
    for (int iy = 0; iy < grid.n; ++iy)
        for (int ix = 0; ix < grid.n; ++ix) {
            const double s = norm2(grid.center(ix, iy)) / (radius * radius);
            if (s < 1.0) f.at(ix, iy) = amplitude * std::exp(-s / (1.0 - s));
        }
    return f;
}

std::vector<Vec2> ring(int N, double radius) {
    std::vector<Vec2> q;
    for (int i = 0; i < N; ++i) {
        const double th = 2.0 * kPi * i / N;
        q.push_back({radius * std::cos(th), radius * std::sin(th)});
    }
    return q;
}

// a coupled pair of states rich enough to light up every term
struct CoupledPair {
    MacroState mac;
    MicroState mic;
};

CoupledPair rich_states(PoissonSolver& solver, const Grid& g, int N) {
    CoupledPair s;
    s.mac.omega = plateau_field(g, 0.45, 0.04, 0.8);
    s.mac.rho = plateau_field(g, 0.3, 0.04, 1.0);
    s.mac.v = velocity_from_vorticity(solver, s.mac.omega + s.mac.rho);
    s.mic.omega = plateau_field(g, 0.45, 0.04, 0.75);
    s.mic.particles.q = ring(N, 0.2);
    for (const Vec2& x : s.mic.particles.q) {
        const Vec2 v = interpolate_vec(s.mac.v, x);
        s.mic.particles.p.push_back({0.9 * v.x + 0.02, 0.9 * v.y - 0.01});
    }
    return s;
}

} // namespace

TEST_CASE("pair sum of two atoms carries the closed-form kernel value") {
    Grid g(2.0, 32);
    PoissonSolver solver(g);
    GridField mu = GridField::scalar(g);
    const double d = std::exp(-1.0);
    const std::vector<Vec2> atoms = {{-d / 2.0, 0.0}, {d / 2.0, 0.0}};
    const std::vector<double> w = {0.5, 0.5};
    // atoms a distance 1/e apart: g = 1/(2 pi), doubled pair sum 2 w1 w2 g
    const double got = coulomb_double_integral(solver, mu, atoms, w);
    CHECK(got == doctest::Approx(1.0 / (4.0 * kPi)).epsilon(1e-12));

    const std::vector<Vec2> twice = {{0.3, 0.1}, {0.3, 0.1}};
    CHECK_THROWS_AS(coulomb_double_integral(solver, mu, twice, w), CollisionError);
    CHECK_THROWS_AS(coulomb_double_integral(solver, mu, atoms, {1.0}), ConfigError);
}

TEST_CASE("field-only double integral matches the direct table sum") {
    Grid g(2.0, 32);
    PoissonSolver solver(g);
    GridField mu = bump_field(g, 1.0, 1.3);
    const double got = coulomb_double_integral(solver, mu, {}, {});

    const oracle::KernelTables tab(g, oracle::cell_average_log_kernel_quadrature(g.spacing()));
    const GridField psi = oracle::brute_psi(mu, tab);
    double want = 0.0;
    for (int iy = 0; iy < g.n; ++iy)
        for (int ix = 0; ix < g.n; ++ix) want += psi.at(ix, iy) * mu.at(ix, iy);
    want *= g.cell_area();
    CHECK(oracle::rel_gap(got, want, 1e-14) <= 1e-10);
}

TEST_CASE("every term of the breakdown matches the reference evaluation") {
    Grid g(2.0, 32);
    PoissonSolver solver(g);
    CoupledPair s = rich_states(solver, g, 8);

    BNPolicy policy;
    EnergyBreakdown got = modulated_energy(solver, s.mac, s.mic, policy);
    oracle::EnergyRef want = oracle::modulated_energy_reference(s.mac, s.mic, policy.c0);

    CHECK(oracle::rel_gap(got.T1, want.T1, 1e-13) <= 1e-9);
    CHECK(oracle::rel_gap(got.T2, want.T2, 1e-13) <= 1e-9);
    CHECK(oracle::rel_gap(got.T3, want.T3, 1e-13) <= 1e-9);
    CHECK(oracle::rel_gap(got.T4, want.T4, 1e-13) <= 1e-9);
    CHECK(oracle::rel_gap(got.T5, want.T5, 1e-13) <= 1e-9);
    CHECK(oracle::rel_gap(got.T6, want.T6, 1e-13) <= 1e-9);
    CHECK(oracle::rel_gap(got.coulomb_block, want.coulomb_block, 1e-13) <= 1e-9);
    CHECK(oracle::rel_gap(got.H, want.H, 1e-13) <= 1e-9);
    CHECK(oracle::rel_gap(got.H_tilde, want.H_tilde, 1e-13) <= 1e-9);
}

TEST_CASE("breakdown satisfies its own summation identities") {
    Grid g(2.0, 32);
    PoissonSolver solver(g);
    CoupledPair s = rich_states(solver, g, 8);
    s.mac.t = s.mic.t = 0.25;

    BNPolicy policy;
    EnergyBreakdown b = modulated_energy(solver, s.mac, s.mic, policy);
    CHECK(b.t == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(std::fabs(b.coulomb_block - (b.T2 + b.T3 + b.T4)) <= 1e-12 * (1.0 + std::fabs(b.coulomb_block)));
    CHECK(std::fabs(b.H - (b.T1 + b.coulomb_block + b.T5 + b.T6)) <= 1e-12 * (1.0 + std::fabs(b.H)));
    CHECK(std::fabs(b.H_tilde - (b.H - b.T6)) <= 1e-14 * (1.0 + std::fabs(b.H)));

    BNPolicy policy2;
    EnergyBreakdown again = modulated_energy(solver, s.mac, s.mic, policy2);
    CHECK(again.H == b.H);
    CHECK(again.coulomb_block == b.coulomb_block);
}

TEST_CASE("negative coulomb block escalates the confinement constant") {
    Grid g(2.0, 32);
    PoissonSolver solver(g);
    MacroState mac;
    mac.omega = GridField::scalar(g);
    mac.rho = GridField::scalar(g);
    mac.v = GridField::vector(g);
    MicroState mic;
    mic.omega = GridField::scalar(g);
    const int N = 16;
    const double R = 1.8;
    mic.particles.q = ring(N, R);
    mic.particles.p.assign(N, Vec2{});

    // ring pair energy in closed form via prod_{k=1}^{N-1} 2 sin(pi k/N) = N:
    // sum_{i != j} ln|q_i - q_j| = N ((N-1) ln R + ln N)
    const double block_want = -N * ((N - 1) * std::log(R) + std::log(double(N))) / (2.0 * kPi * N * N);

    BNPolicy policy;
    policy.c0 = 1e-6;
    EnergyBreakdown b = modulated_energy(solver, mac, mic, policy);
    CHECK(b.coulomb_block == doctest::Approx(block_want).epsilon(1e-12));
    CHECK(b.coulomb_block < 0.0);
    CHECK(policy.escalations > 0);
    CHECK(policy.escalations < 60);
    CHECK(policy.c0 == doctest::Approx(1e-6 * std::pow(2.0, policy.escalations)).epsilon(1e-12));
    CHECK(b.coulomb_block + b.T6 >= 0.0);

    oracle::EnergyRef want = oracle::modulated_energy_reference(mac, mic, policy.c0);
    CHECK(oracle::rel_gap(b.H, want.H, 1e-13) <= 1e-9);
}

TEST_CASE("state mismatches are refused") {
    Grid g(2.0, 32);
    PoissonSolver solver(g);
    CoupledPair s = rich_states(solver, g, 4);
    BNPolicy policy;

    MicroState empty;
    empty.omega = GridField::scalar(g);
    CHECK_THROWS_AS(modulated_energy(solver, s.mac, empty, policy), ConfigError);

    s.mic.t = 0.5;
    CHECK_THROWS_AS(modulated_energy(solver, s.mac, s.mic, policy), ConfigError);
    s.mic.t = 0.0;

    Grid g2(2.0, 64);
    PoissonSolver solver2(g2);
    MacroState other;
    other.omega = GridField::scalar(g2);
    other.rho = GridField::scalar(g2);
    other.v = GridField::vector(g2);
    CHECK_THROWS_AS(modulated_energy(solver2, other, s.mic, policy), ConfigError);
}

TEST_CASE("atom deposit is exact on centers and conserves weight") {
    Grid g(2.0, 32);
    const double h = g.spacing();

    GridField one = deposit_atoms(g, {g.center(10, 7)}, 0.7);
    CHECK(one.at(10, 7) == doctest::Approx(0.7 / (h * h)).epsilon(1e-12));
    CHECK(integrate(one) == doctest::Approx(0.7).epsilon(1e-12));
    one.at(10, 7) = 0.0;
    CHECK(linf_norm(one) == 0.0);

    // a corner point splits evenly across its four neighbours
    const Vec2 corner = {g.coord(10) + h / 2.0, g.coord(7) + h / 2.0};
    GridField four = deposit_atoms(g, {corner}, 1.0);
    CHECK(four.at(10, 7) == doctest::Approx(0.25 / (h * h)).epsilon(1e-12));
    CHECK(four.at(11, 8) == doctest::Approx(0.25 / (h * h)).epsilon(1e-12));

    GridField many = deposit_atoms(g, ring(13, 1.1), 2.0);
    CHECK(integrate(many) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("single resting particle saturates the zero mode") {
    Grid g(2.0, 16);
    MacroState mac;
    mac.omega = GridField::scalar(g);
    mac.rho = GridField::scalar(g);
    mac.v = GridField::vector(g);
    MicroState mic;
    mic.omega = GridField::scalar(g);
    mic.particles.q = {{0.0, 0.0}};
    mic.particles.p = {{0.0, 0.0}};

    // empirical pairing of the kappa = 0 mode is 1, the continuum side 0;
    // the normalization is the 4D box volume root 4 L P
    CoercivityReport fitted = coercivity_report(mac, mic, 2);
    CHECK(fitted.momentum_half_width == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(fitted.dict_distance == doctest::Approx(1.0 / (4.0 * 2.0 * 0.1)).epsilon(1e-9));

    CoercivityReport wide = coercivity_report(mac, mic, 2, 0.7);
    CHECK(wide.momentum_half_width == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(wide.dict_distance == doctest::Approx(1.0 / (4.0 * 2.0 * 0.7)).epsilon(1e-9));

    CHECK_THROWS_AS(coercivity_report(mac, mic, 9), ConfigError);
}

TEST_CASE("lattice refinement shrinks the weak distances") {
    Grid g(2.0, 64);
    PoissonSolver solver(g);
    MacroState mac;
    mac.omega = GridField::scalar(g);
    mac.rho = plateau_field(g, 0.5, 0.04, 1.0);
    const double m = integrate(mac.rho);
    mac.rho = (1.0 / m) * mac.rho;
    mac.v = velocity_from_vorticity(solver, mac.rho);

    auto at_N = [&](int N) {
        MicroState mic;
        mic.omega = GridField::scalar(g);
        mic.particles.q = sample_positions(mac.rho, N, SampleScheme::lattice, 7);
        for (const Vec2& x : mic.particles.q)
            mic.particles.p.push_back(interpolate_vec(mac.v, x));
        return mic;
    };

    // perfect squares keep the lattice untruncated, so refinement is clean
    double prev_dict = 0.0, prev_pair = 0.0, prev_weak = 0.0;
    int step = 0;
    for (int N : {36, 144, 576}) {
        MicroState mic = at_N(N);
        CoercivityReport rep = coercivity_report(mac, mic, 2, 1.0);
        WellPreparedness wp = well_preparedness_check(solver, mac, mic, 2);
        CHECK(rep.l2_omega_gap == 0.0);
        CHECK(wp.l2_omega_gap == 0.0);
        if (step > 0) {
            CHECK(rep.dict_distance < prev_dict);
            CHECK(wp.pair_vs_double < prev_pair);
            CHECK(wp.weak_rho_dict < prev_weak);
        }
        prev_dict = rep.dict_distance;
        prev_pair = wp.pair_vs_double;
        prev_weak = wp.weak_rho_dict;
        ++step;
    }
}

TEST_CASE("measured decay rate matches a finite difference of the energy") {
    Grid g(2.0, 64);
    PoissonSolver solver(g);
    CoupledPair s = rich_states(solver, g, 8);
    // monokinetic start keeps the trajectory smooth over the window
    s.mic.particles.p.clear();
    for (const Vec2& x : s.mic.particles.q)
        s.mic.particles.p.push_back(interpolate_vec(s.mac.v, x));

    const double dt = 1e-3;
    const MicroParams prm;
    BNPolicy policy;

    std::vector<double> ht;
    RateBreakdown mid_rate;
    for (int k = 0; k <= 4; ++k) {
        ht.push_back(modulated_energy(solver, s.mac, s.mic, policy).H_tilde);
        if (k == 2) mid_rate = energy_rate(solver, s.mac, s.mic, prm);
        step_macro(solver, s.mac, dt, {});
        step_micro(solver, s.mic, dt, prm);
    }

    // centered differences of H_tilde around k = 2 at delta = dt and 2 dt;
    // the identity holds up to scheme truncation on both sides
    const double fd1 = (ht[3] - ht[1]) / (2.0 * dt);
    const double fd2 = (ht[4] - ht[0]) / (4.0 * dt);
    CHECK(mid_rate.sum == doctest::Approx(mid_rate.R1 + mid_rate.R2 + mid_rate.R3).epsilon(1e-12));
    CHECK(std::fabs(mid_rate.sum - fd1) <= 2e-3 * (1.0 + std::fabs(mid_rate.sum)));
    CHECK(std::fabs(mid_rate.sum - fd2) <= 2e-3 * (1.0 + std::fabs(mid_rate.sum)));
}
