#include "spraylab/poisson.hpp"

#include <complex>
#include <cstring>
#include <mutex>
#include <vector>

#include <fftw3.h>

#include "spraylab/errors.hpp"
#include "spraylab/kernels.hpp"
#include "spraylab/spectral.hpp"

namespace spray {

struct PoissonSolver::Impl {
    int n = 0;        // box cells per axis
    int m = 0;        // padded cells per axis (2n)
    int mc = 0;       // m/2 + 1, r2c fast-axis length
    double h = 0.0;

    double* real = nullptr;        // m x m scratch
    fftw_complex* spec = nullptr;  // m x mc scratch (inverse input)
    fftw_complex* mu_hat = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;

    // transformed kernel tables for g, dg/dx, dg/dy
    std::vector<std::complex<double>> kg, kgx, kgy;

    std::size_t real_count() const { return static_cast<std::size_t>(m) * m; }
    std::size_t spec_count() const { return static_cast<std::size_t>(m) * mc; }

    void transform_kernel(std::vector<std::complex<double>>& dst, int component);
};

namespace {

// signed displacement (in cells) encoded by a padded index
inline int wrap_displacement(int idx, int m) { return (idx <= m / 2) ? idx : idx - m; }

} // namespace

void PoissonSolver::Impl::transform_kernel(std::vector<std::complex<double>>& dst,
                                           int component) {
    // component: 0 -> g, 1 -> dg/dx, 2 -> dg/dy
    for (int iy = 0; iy < m; ++iy) {
        const double dy = wrap_displacement(iy, m) * h;
        for (int ix = 0; ix < m; ++ix) {
            const double dx = wrap_displacement(ix, m) * h;
            double v;
            if (ix == 0 && iy == 0) {
                // cell average of g; grad g averages to zero by odd symmetry
                v = (component == 0) ? green_cell_average(h) : 0.0;
            } else {
                const Vec2 d{dx, dy};
                if (component == 0) v = green_kernel(d);
                else if (component == 1) v = grad_green(d).x;
                else v = grad_green(d).y;
            }
            real[static_cast<std::size_t>(iy) * m + ix] = v;
        }
    }
    fftw_execute(fwd); // the forward plan writes mu_hat; copy the table out
    dst.resize(spec_count());
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = {mu_hat[i][0], mu_hat[i][1]};
}

PoissonSolver::PoissonSolver(const Grid& grid, double boundary_mass_rel)
    : grid_(grid), boundary_mass_rel_(boundary_mass_rel), impl_(new Impl) {
    Impl& im = *impl_;
    im.n = grid.n;
    im.m = 2 * grid.n;
    im.mc = im.m / 2 + 1;
    im.h = grid.spacing();

    im.real = fftw_alloc_real(im.real_count());
    im.spec = fftw_alloc_complex(im.spec_count());
    im.mu_hat = fftw_alloc_complex(im.spec_count());
    {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        im.fwd = fftw_plan_dft_r2c_2d(im.m, im.m, im.real, im.mu_hat, FFTW_ESTIMATE);
        im.inv = fftw_plan_dft_c2r_2d(im.m, im.m, im.spec, im.real, FFTW_ESTIMATE);
    }
    im.transform_kernel(im.kg, 0);
    im.transform_kernel(im.kgx, 1);
    im.transform_kernel(im.kgy, 2);
}

PoissonSolver::~PoissonSolver() {
    Impl& im = *impl_;
    {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        fftw_destroy_plan(im.fwd);
        fftw_destroy_plan(im.inv);
    }
    fftw_free(im.real);
    fftw_free(im.spec);
    fftw_free(im.mu_hat);
    delete impl_;
}

PoissonSolver::Solution PoissonSolver::solve(const GridField& mu, bool want_psi, bool want_grad) {
    if (mu.components() != 1)
        throw ConfigError("convolution input must be a scalar field");
    if (!(mu.grid() == grid_))
        throw ConfigError("convolution input lives on a different grid");
    if (!mu.finite())
        throw NumericalAbort("convolution input holds non-finite samples");

    const double peak = linf_norm(mu);
    if (boundary_band_max(mu, 2.0 * impl_->h) > boundary_mass_rel_ * peak)
        throw SupportViolation("field carries mass within 2h of the box edge; "
                               "free-space convolution would wrap around");

    Impl& im = *impl_;
    const int n = im.n, m = im.m, off = im.n / 2;

    std::memset(im.real, 0, im.real_count() * sizeof(double));
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix < n; ++ix)
            im.real[static_cast<std::size_t>(iy + off) * m + (ix + off)] = mu.at(ix, iy);
    fftw_execute(im.fwd);

    // quadrature weight h^2 and the m^2 round-trip normalization of FFTW
    const double scale = im.h * im.h / (static_cast<double>(m) * m);

    auto convolve_into = [&](const std::vector<std::complex<double>>& kernel, GridField& out, int comp) {
        for (std::size_t i = 0; i < im.spec_count(); ++i) {
            const double ar = im.mu_hat[i][0], ai = im.mu_hat[i][1];
            const double br = kernel[i].real(), bi = kernel[i].imag();
            im.spec[i][0] = scale * (ar * br - ai * bi);
            im.spec[i][1] = scale * (ar * bi + ai * br);
        }
        fftw_execute(im.inv);
        for (int iy = 0; iy < n; ++iy)
            for (int ix = 0; ix < n; ++ix)
                out.at(comp, ix, iy) = im.real[static_cast<std::size_t>(iy + off) * m + (ix + off)];
    };

    Solution sol;
    if (want_psi) {
        sol.psi = GridField::scalar(grid_);
        convolve_into(im.kg, sol.psi, 0);
    }
    if (want_grad) {
        sol.grad = GridField::vector(grid_);
        convolve_into(im.kgx, sol.grad, 0);
        convolve_into(im.kgy, sol.grad, 1);
    }
    return sol;
}

} // namespace spray
