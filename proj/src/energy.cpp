#include "spraylab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "spraylab/biot_savart.hpp"
#include "spraylab/errors.hpp"
#include "spraylab/interp.hpp"
#include "spraylab/kernels.hpp"
#include "spraylab/spectral.hpp"
#include "spraylab/transport.hpp"

namespace spray {

namespace {

void require_compatible(const MacroState& macro, const MicroState& micro,
                        double time_tolerance) {
    if (!(macro.omega.grid() == micro.omega.grid()))
        throw ConfigError("macro and micro states live on different grids");
    if (std::fabs(macro.t - micro.t) > time_tolerance)
        throw ConfigError("macro and micro states are out of sync in time: " +
                          std::to_string(macro.t) + " vs " + std::to_string(micro.t));
    if (micro.particles.size() < 1)
        throw ConfigError("modulated energy needs at least one particle");
}

double grid_inner(const GridField& a, const GridField& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.samples().size(); ++i)
        s += a.samples()[i] * b.samples()[i];
    return s * a.grid().cell_area();
}

double pair_energy(const std::vector<Vec2>& q, const std::vector<double>& w) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i)
        for (std::size_t j = i + 1; j < q.size(); ++j) {
            const Vec2 d = q[i] - q[j];
            if (norm2(d) == 0.0)
                throw CollisionError("coincident atoms in a Coulomb pair sum");
            s += 2.0 * w[i] * w[j] * green_kernel(d);
        }
    return s;
}

// Powers e^{i base k u} for k = 0..K, one row per value u; negative k by
// conjugation. Keeps the mode sweeps cheap.
struct PhaseTable {
    int K = 0;
    std::vector<std::complex<double>> pw; // (K+1) per entry

    PhaseTable(const std::vector<double>& values, double base, int K_) : K(K_) {
        pw.resize(values.size() * (K + 1));
        for (std::size_t i = 0; i < values.size(); ++i) {
            const std::complex<double> step = std::polar(1.0, base * values[i]);
            std::complex<double> acc{1.0, 0.0};
            for (int k = 0; k <= K; ++k) {
                pw[i * (K + 1) + k] = acc;
                acc *= step;
            }
        }
    }
    std::complex<double> get(std::size_t i, int k) const {
        const std::complex<double> v = pw[i * (K + 1) + std::abs(k)];
        return k >= 0 ? v : std::conj(v);
    }
};

} // namespace

GridField deposit_atoms(const Grid& grid, const std::vector<Vec2>& q, double total_weight) {
    GridField out = GridField::scalar(grid);
    if (q.empty()) return out;
    const double w = total_weight / q.size() / grid.cell_area();
    const double h = grid.spacing();
    const int n = grid.n;
    for (const Vec2& x : q) {
        const double ux = (x.x + grid.half_width) / h - 0.5;
        const double uy = (x.y + grid.half_width) / h - 0.5;
        int ix = static_cast<int>(std::floor(ux));
        int iy = static_cast<int>(std::floor(uy));
        ix = std::clamp(ix, 0, n - 2);
        iy = std::clamp(iy, 0, n - 2);
        const double fx = std::clamp(ux - ix, 0.0, 1.0);
        const double fy = std::clamp(uy - iy, 0.0, 1.0);
        out.at(ix, iy) += w * (1.0 - fx) * (1.0 - fy);
        out.at(ix + 1, iy) += w * fx * (1.0 - fy);
        out.at(ix, iy + 1) += w * (1.0 - fx) * fy;
        out.at(ix + 1, iy + 1) += w * fx * fy;
    }
    return out;
}

double coulomb_double_integral(PoissonSolver& solver, const GridField& mu,
                               const std::vector<Vec2>& atoms,
                               const std::vector<double>& weights) {
    if (atoms.size() != weights.size())
        throw ConfigError("coulomb_double_integral: atoms and weights disagree in length");
    auto sol = solver.solve(mu, /*want_psi=*/true, /*want_grad=*/false);
    double acc = grid_inner(sol.psi, mu);
    for (std::size_t k = 0; k < atoms.size(); ++k)
        acc -= 2.0 * weights[k] * bicubic_scalar(sol.psi, atoms[k]);
    acc += pair_energy(atoms, weights);
    return acc;
}

EnergyBreakdown modulated_energy(PoissonSolver& solver, const MacroState& macro,
                                 const MicroState& micro, BNPolicy& policy,
                                 double time_tolerance) {
    require_compatible(macro, micro, time_tolerance);
    const int N = micro.particles.size();
    const GridField alpha = macro.omega + macro.rho;

    auto sol_alpha = solver.solve(alpha, true, false);
    auto sol_omn = solver.solve(micro.omega, true, false);

    EnergyBreakdown out;
    out.t = micro.t;

    for (int i = 0; i < N; ++i) {
        const Vec2 gap = interpolate_vec(macro.v, micro.particles.q[i]) - micro.particles.p[i];
        out.T1 += norm2(gap);
    }
    out.T1 /= N;

    std::vector<double> unit_weights(N, 1.0 / N);
    double cross_omn = 0.0, cross_alpha = 0.0;
    for (int i = 0; i < N; ++i) {
        cross_omn += bicubic_scalar(sol_omn.psi, micro.particles.q[i]);
        cross_alpha += bicubic_scalar(sol_alpha.psi, micro.particles.q[i]);
    }
    out.T2 = grid_inner(sol_omn.psi, micro.omega) + 2.0 * cross_omn / N +
             pair_energy(micro.particles.q, unit_weights);
    out.T3 = grid_inner(sol_alpha.psi, alpha);
    out.T4 = -2.0 * grid_inner(sol_alpha.psi, micro.omega) - 2.0 * cross_alpha / N;

    const GridField omega_gap = macro.omega - micro.omega;
    out.T5 = grid_inner(omega_gap, omega_gap);

    out.coulomb_block = out.T2 + out.T3 + out.T4;

    const double peak = linf_norm(macro.rho + omega_gap);
    double t6 = 0.0;
    for (;;) {
        const double bn = policy.c0 * (1.0 + peak);
        t6 = bn / N + 0.5 * std::log(static_cast<double>(N)) / N;
        if (out.coulomb_block + t6 >= 0.0 || policy.escalations >= 60) break;
        policy.c0 *= 2.0;
        ++policy.escalations;
    }
    out.T6 = t6;

    out.H = out.T1 + out.T2 + out.T3 + out.T4 + out.T5 + out.T6;
    out.H_tilde = out.H - out.T6;
    return out;
}

RateBreakdown energy_rate(PoissonSolver& solver, const MacroState& macro,
                          const MicroState& micro, const MicroParams& prm,
                          double time_tolerance) {
    require_compatible(macro, micro, time_tolerance);
    const int N = micro.particles.size();
    const Grid& grid = macro.omega.grid();
    const double cell = grid.cell_area();
    const GridField alpha = macro.omega + macro.rho;
    const GridField mu_g = alpha - micro.omega; // grid part of the signed difference

    auto sol_alpha = solver.solve(alpha, false, true);
    auto sol_omn = solver.solve(micro.omega, false, true);

    RateBreakdown out;

    // R1: quadratic form of grad v along the particle velocity mismatch
    const GridField gvx = gradient_central(macro.v, 0);
    const GridField gvy = gradient_central(macro.v, 1);
    std::vector<Vec2> v_at(N);
    for (int i = 0; i < N; ++i) {
        const Vec2 q = micro.particles.q[i];
        v_at[i] = interpolate_vec(macro.v, q);
        const Vec2 w = v_at[i] - micro.particles.p[i];
        const Vec2 dx_v{interpolate_scalar(gvx, q, 0), interpolate_scalar(gvy, q, 0)};
        const Vec2 dy_v{interpolate_scalar(gvx, q, 1), interpolate_scalar(gvy, q, 1)};
        const double quad = w.x * (dx_v.x * w.x + dx_v.y * w.y) +
                            w.y * (dy_v.x * w.x + dy_v.y * w.y);
        out.R1 -= 2.0 * quad / N;
    }

    // R2, grid x grid: 2 integral v . (grad g * mu_g) mu_g
    const int n = grid.n;
    double gg = 0.0;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            const Vec2 G{sol_alpha.grad.at(0, ix, iy) - sol_omn.grad.at(0, ix, iy),
                         sol_alpha.grad.at(1, ix, iy) - sol_omn.grad.at(1, ix, iy)};
            gg += dot(macro.v.vec_at(ix, iy), G) * mu_g.at(ix, iy);
        }
    gg *= 2.0 * cell;

    // R2, grid x atom: exact kernel against the nonzero cells
    std::vector<int> nz;
    nz.reserve(mu_g.plane_size());
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            if (mu_g.at(ix, iy) != 0.0) nz.push_back(iy * n + ix);
    const double tiny2 = 1e-18 * grid.spacing() * grid.spacing();
    // cross part is -(2/N) sum_k integral (v(x) - v(q_k)) . grad g(x - q_k) mu_g(x) dx;
    // grad g(d) = -d/(2 pi |d|^2), so the two minus signs cancel
    double ga = 0.0;
    for (int k = 0; k < N; ++k) {
        const Vec2 qk = micro.particles.q[k];
        const Vec2 vk = v_at[k];
        double acc = 0.0;
        for (int idx : nz) {
            const int ix = idx % n, iy = idx / n;
            const Vec2 d = grid.center(ix, iy) - qk;
            const double r2 = norm2(d);
            if (r2 < tiny2) continue; // integrand is bounded; dropping one cell is O(h^2)
            const Vec2 dv = macro.v.vec_at(ix, iy) - vk;
            acc += (dot(dv, d) / r2) * mu_g.at(ix, iy);
        }
        ga += acc;
    }
    ga *= 2.0 * cell / (kTwoPi * N);

    // R2, atom x atom
    double aa = 0.0;
    for (int k = 0; k < N; ++k)
        for (int l = k + 1; l < N; ++l) {
            const Vec2 d = micro.particles.q[k] - micro.particles.q[l];
            aa += 2.0 * dot(v_at[k] - v_at[l], grad_green(d));
        }
    aa /= static_cast<double>(N) * N;

    out.R2 = gg + ga + aa;

    // R3: alignment term against the velocity and density gaps
    GridField VN = GridField::vector(grid);
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            const Vec2 gp = sol_omn.grad.vec_at(ix, iy);
            VN.set_vec(ix, iy, {gp.y, -gp.x});
        }
    if (N > 0) {
        const double eps = prm.blob_eps_factor * grid.spacing();
        add_blob_velocity(VN, micro.particles.q, 1.0 / N, eps);
    }
    const GridField grad_omega = gradient_central(macro.omega, 0);
    double r3 = 0.0;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix) {
            const Vec2 V{sol_alpha.grad.at(1, ix, iy), -sol_alpha.grad.at(0, ix, iy)};
            const Vec2 A = 2.0 * (perp(macro.v.vec_at(ix, iy)) - perp(V) - grad_omega.vec_at(ix, iy));
            const Vec2 dV = V - VN.vec_at(ix, iy);
            r3 += dot(A, dV) * (macro.omega.at(ix, iy) - micro.omega.at(ix, iy));
        }
    out.R3 = r3 * cell;

    out.sum = out.R1 + out.R2 + out.R3;
    return out;
}

CoercivityReport coercivity_report(const MacroState& macro, const MicroState& micro,
                                   int K, double P) {
    require_compatible(macro, micro, 1e-9);
    if (K < 0 || K > 8)
        throw ConfigError("dictionary order K must lie in [0, 8]");
    const int N = micro.particles.size();
    const Grid& grid = macro.omega.grid();

    CoercivityReport out;
    out.K = K;

    if (P <= 0.0) {
        double m = 0.0;
        for (const Vec2& p : micro.particles.p)
            m = std::max({m, std::fabs(p.x), std::fabs(p.y)});
        for (int iy = 0; iy < grid.n; ++iy)
            for (int ix = 0; ix < grid.n; ++ix) {
                const Vec2 v = macro.v.vec_at(ix, iy);
                m = std::max({m, std::fabs(v.x), std::fabs(v.y)});
            }
        P = 1.1 * m + 0.1;
    }
    out.momentum_half_width = P;

    // phase tables for the particle side
    std::vector<double> qx(N), qy(N), px(N), py(N);
    for (int i = 0; i < N; ++i) {
        qx[i] = micro.particles.q[i].x;
        qy[i] = micro.particles.q[i].y;
        px[i] = micro.particles.p[i].x;
        py[i] = micro.particles.p[i].y;
    }
    const double bx = std::numbers::pi / grid.half_width;
    const double bp = std::numbers::pi / P;
    PhaseTable tqx(qx, bx, K), tqy(qy, bx, K), tpx(px, bp, K), tpy(py, bp, K);

    // phase tables for the continuum side, over cells where rho is nonzero
    std::vector<double> cx, cy, cvx, cvy, crho;
    for (int iy = 0; iy < grid.n; ++iy)
        for (int ix = 0; ix < grid.n; ++ix) {
            const double r = macro.rho.at(ix, iy);
            if (r == 0.0) continue;
            const Vec2 c = grid.center(ix, iy);
            const Vec2 v = macro.v.vec_at(ix, iy);
            cx.push_back(c.x);
            cy.push_back(c.y);
            cvx.push_back(v.x);
            cvy.push_back(v.y);
            crho.push_back(r);
        }
    PhaseTable tcx(cx, bx, K), tcy(cy, bx, K), tvx(cvx, bp, K), tvy(cvy, bp, K);

    const double vol4 = (2.0 * grid.half_width) * (2.0 * grid.half_width) * (2.0 * P) * (2.0 * P);
    const double cell = grid.cell_area();

    double best = 0.0;
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = -K; k2 <= K; ++k2)
            for (int k3 = -K; k3 <= K; ++k3)
                for (int k4 = 0; k4 <= K; ++k4) { // conjugate symmetry halves the sweep
                    std::complex<double> emp{0.0, 0.0};
                    for (int i = 0; i < N; ++i)
                        emp += tqx.get(i, k1) * tqy.get(i, k2) * tpx.get(i, k3) * tpy.get(i, k4);
                    emp /= static_cast<double>(N);
                    std::complex<double> cont{0.0, 0.0};
                    for (std::size_t c = 0; c < crho.size(); ++c)
                        cont += crho[c] * tcx.get(c, k1) * tcy.get(c, k2) *
                                tvx.get(c, k3) * tvy.get(c, k4);
                    cont *= cell;
                    const double kap2 = bx * bx * (double(k1) * k1 + double(k2) * k2) +
                                        bp * bp * (double(k3) * k3 + double(k4) * k4);
                    const double norm_h5 = std::sqrt(vol4) * std::pow(1.0 + kap2, 2.5);
                    best = std::max(best, std::abs(emp - cont) / norm_h5);
                }
    out.dict_distance = best;

    out.l2_omega_gap = l2_norm(macro.omega - micro.omega);
    const GridField dep = deposit_atoms(grid, micro.particles.q, 1.0);
    out.weak_rho_gap = sobolev_norm(macro.rho - dep, -2.0);
    return out;
}

WellPreparedness well_preparedness_check(PoissonSolver& solver, const MacroState& macro,
                                         const MicroState& micro, int K) {
    require_compatible(macro, micro, 1e-9);
    const int N = micro.particles.size();
    const Grid& grid = macro.omega.grid();

    WellPreparedness out;
    out.l2_omega_gap = l2_norm(macro.omega - micro.omega);

    // 2D dictionary gap of rho vs the atoms, H^2-normalized modes
    std::vector<double> qx(N), qy(N);
    for (int i = 0; i < N; ++i) {
        qx[i] = micro.particles.q[i].x;
        qy[i] = micro.particles.q[i].y;
    }
    const double bx = std::numbers::pi / grid.half_width;
    PhaseTable tqx(qx, bx, K), tqy(qy, bx, K);
    std::vector<double> cx, cy, crho;
    for (int iy = 0; iy < grid.n; ++iy)
        for (int ix = 0; ix < grid.n; ++ix) {
            if (macro.rho.at(ix, iy) == 0.0) continue;
            const Vec2 c = grid.center(ix, iy);
            cx.push_back(c.x);
            cy.push_back(c.y);
            crho.push_back(macro.rho.at(ix, iy));
        }
    PhaseTable tcx(cx, bx, K), tcy(cy, bx, K);
    const double vol2 = (2.0 * grid.half_width) * (2.0 * grid.half_width);
    const double cell = grid.cell_area();
    double best = 0.0;
    for (int k1 = -K; k1 <= K; ++k1)
        for (int k2 = 0; k2 <= K; ++k2) {
            std::complex<double> emp{0.0, 0.0};
            for (int i = 0; i < N; ++i) emp += tqx.get(i, k1) * tqy.get(i, k2);
            emp /= static_cast<double>(N);
            std::complex<double> cont{0.0, 0.0};
            for (std::size_t c = 0; c < crho.size(); ++c)
                cont += crho[c] * tcx.get(c, k1) * tcy.get(c, k2);
            cont *= cell;
            const double kap2 = bx * bx * (double(k1) * k1 + double(k2) * k2);
            best = std::max(best, std::abs(emp - cont) / (std::sqrt(vol2) * (1.0 + kap2)));
        }
    out.weak_rho_dict = best;

    std::vector<double> w(N, 1.0 / N);
    auto sol_rho = solver.solve(macro.rho, true, false);
    double dbl = grid_inner(sol_rho.psi, macro.rho);
    out.pair_vs_double = std::fabs(pair_energy(micro.particles.q, w) - dbl);

    out.coulomb_block = coulomb_double_integral(solver, macro.omega + macro.rho - micro.omega,
                                                micro.particles.q, w);
    return out;
}

} // namespace spray
