#include "spraylab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "spraylab/errors.hpp"
#include "spraylab/interp.hpp"

namespace spray {

SampleScheme parse_scheme(const std::string& word) {
    if (word == "iid") return SampleScheme::iid;
    if (word == "lattice") return SampleScheme::lattice;
    if (word == "halton") return SampleScheme::halton;
    throw ConfigError("unknown sampling scheme '" + word + "'");
}

namespace {

// Piecewise-constant density on the grid, inverted exactly: pick the row by
// the y marginal, then the cell by the conditional along that row, then place
// the point linearly inside the cell.
struct InverseCdf {
    explicit InverseCdf(const GridField& rho) : grid(rho.grid()), n(grid.n) {
        const double peak = linf_norm(rho);
        if (!(peak > 0.0)) throw ConfigError("sampling density is identically zero");
        row_prefix.assign(std::size_t(n) * (n + 1), 0.0);
        y_prefix.assign(n + 1, 0.0);
        for (int iy = 0; iy < n; ++iy) {
            double* row = &row_prefix[std::size_t(iy) * (n + 1)];
            for (int ix = 0; ix < n; ++ix) {
                double v = rho.at(ix, iy);
                if (v < -1e-12 * peak) throw ConfigError("sampling density has negative values");
                row[ix + 1] = row[ix] + std::max(v, 0.0);
            }
            y_prefix[iy + 1] = y_prefix[iy] + row[n];
        }
        total = y_prefix[n];
    }

    // u, v in [0, 1)
    Vec2 map(double u, double v) const {
        const double ty = v * total;
        const int iy = pick(y_prefix.data(), n, ty);
        const double* row = &row_prefix[std::size_t(iy) * (n + 1)];
        const double fy = (ty - y_prefix[iy]) / row[n];
        const double tx = u * row[n];
        const int ix = pick(row, n, tx);
        const double fx = (tx - row[ix]) / (row[ix + 1] - row[ix]);
        const double h = grid.spacing();
        return {-grid.half_width + (ix + fx) * h, -grid.half_width + (iy + fy) * h};
    }

    static int pick(const double* prefix, int n, double target) {
        // first cell whose prefix interval still has mass above target;
        // equal consecutive prefixes (empty cells) are skipped by upper_bound
        const double* it = std::upper_bound(prefix, prefix + n + 1, target);
        int i = int(it - prefix) - 1;
        return std::clamp(i, 0, n - 1);
    }

    Grid grid;
    int n;
    std::vector<double> row_prefix;
    std::vector<double> y_prefix;
    double total = 0.0;
};

double radical_inverse(std::uint64_t i, std::uint64_t base) {
    double r = 0.0;
    double f = 1.0 / double(base);
    while (i > 0) {
        r += f * double(i % base);
        i /= base;
        f /= double(base);
    }
    return r;
}

} // namespace

std::vector<Vec2> sample_positions(const GridField& rho0, int N, SampleScheme scheme,
                                   std::uint64_t seed, const GridField* exclude,
                                   bool* overlapped) {
    if (rho0.components() != 1) throw ConfigError("sampling density must be a scalar field");
    if (N < 1) throw ConfigError("particle count must be positive");
    const InverseCdf cdf(rho0);

    double reject_level = 0.0;
    if (exclude) {
        if (exclude->grid() != rho0.grid() || exclude->components() != 1)
            throw ConfigError("exclusion field must be a scalar on the sampling grid");
        reject_level = 1e-12 * linf_norm(*exclude);
    }
    bool hit_overlap = false;
    // An exclusion zone covering the whole sampling support would otherwise
    // spin forever; admissible configs reject a modest fraction, so a large
    // multiple of N is a safe cutoff.
    const long attempt_cap = 1024L * N + 65536L;
    long attempts = 0;
    auto blocked = [&](Vec2 x) {
        if (++attempts > attempt_cap)
            throw ConfigError("sampling rejected too many candidates; the exclusion zone covers the density");
        if (!exclude || reject_level <= 0.0) return false;
        if (std::abs(interpolate_scalar(*exclude, x)) > reject_level) {
            hit_overlap = true;
            return true;
        }
        return false;
    };

    std::vector<Vec2> out;
    out.reserve(N);

    if (scheme == SampleScheme::iid) {
        std::mt19937_64 gen(seed);
        auto unit = [&] { return double(gen() >> 11) * 0x1.0p-53; };
        while (int(out.size()) < N) {
            double u = unit();
            double v = unit();
            Vec2 x = cdf.map(u, v);
            if (!blocked(x)) out.push_back(x);
        }
    } else if (scheme == SampleScheme::halton) {
        std::uint64_t i = 1;
        while (int(out.size()) < N) {
            Vec2 x = cdf.map(radical_inverse(i, 2), radical_inverse(i, 3));
            ++i;
            if (!blocked(x)) out.push_back(x);
        }
    } else {
        // centered square lattice in the unit square; if the exclusion zone
        // eats too many points, refine and start over so the result stays a
        // pure function of N
        int m = int(std::ceil(std::sqrt(double(N))));
        for (;;) {
            out.clear();
            hit_overlap = false;
            for (int iy = 0; iy < m && int(out.size()) < N; ++iy) {
                for (int ix = 0; ix < m && int(out.size()) < N; ++ix) {
                    Vec2 x = cdf.map((ix + 0.5) / m, (iy + 0.5) / m);
                    if (!blocked(x)) out.push_back(x);
                }
            }
            if (int(out.size()) == N) break;
            ++m;
        }
    }

    for (std::size_t a = 0; a < out.size(); ++a)
        for (std::size_t b = a + 1; b < out.size(); ++b)
            if (out[a].x == out[b].x && out[a].y == out[b].y)
                throw ConfigError("sampling produced coincident particles; density support is too coarse");

    if (overlapped) *overlapped = hit_overlap;
    return out;
}

} // namespace spray
