#include "spraylab/spectral.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <fftw3.h>

#include "spraylab/errors.hpp"

namespace spray {

namespace detail {
std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}
}

double sobolev_norm(const GridField& f, double s) {
    if (s < -6.0 || s > 6.0)
        throw ConfigError("sobolev_norm order s must lie in [-6, 6]");
    const Grid& g = f.grid();
    const int n = g.n;
    const int nc = n / 2 + 1;
    const double k0 = std::numbers::pi / g.half_width; // lowest nonzero wavenumber

    double* in = fftw_alloc_real(static_cast<std::size_t>(n) * n);
    fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(n) * nc);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        plan = fftw_plan_dft_r2c_2d(n, n, in, out, FFTW_ESTIMATE);
    }

    // (1 + |k|^2)^s along one axis index, reused for both axes
    std::vector<double> k2(n);
    for (int m = 0; m < n; ++m) {
        const int ms = (m <= n / 2) ? m : m - n;
        k2[m] = (k0 * ms) * (k0 * ms);
    }

    double acc = 0.0;
    for (int c = 0; c < f.components(); ++c) {
        const double* plane = f.samples().data() + static_cast<std::size_t>(c) * f.plane_size();
        for (std::size_t i = 0; i < f.plane_size(); ++i) in[i] = plane[i];
        fftw_execute(plan);
        for (int ky = 0; ky < n; ++ky) {
            for (int kx = 0; kx < nc; ++kx) {
                const fftw_complex& v = out[static_cast<std::size_t>(ky) * nc + kx];
                const double mag2 = v[0] * v[0] + v[1] * v[1];
                // r2c keeps only kx <= n/2; interior columns stand for +-kx
                const double mult = (kx == 0 || kx == n / 2) ? 1.0 : 2.0;
                acc += mult * std::pow(1.0 + k2[kx] + k2[ky], s) * mag2;
            }
        }
    }

    {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);

    // Parseval: h^2 sum_x |f|^2 = (h^2 / n^2) sum_k |F_k|^2
    const double h = g.spacing();
    return std::sqrt(acc * h * h / (static_cast<double>(n) * n));
}

} // namespace spray
