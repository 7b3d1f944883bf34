#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spraylab/grid.hpp"

namespace spray {

enum class SampleScheme { iid, lattice, halton };

SampleScheme parse_scheme(const std::string& word);

// Draw N positions with density rho0 / integrate(rho0) by pushing a unit
// square point set through the exact inverse CDF of the piecewise-constant
// cell density (marginal in y, conditional in x).
//   iid     - seeded mt19937_64 uniforms (explicit 53-bit mapping)
//   lattice - centered ceil(sqrt(N))^2 lattice, first N points in row order
//   halton  - Halton sequence, bases 2 and 3, starting at index 1
// Candidates landing where |exclude| exceeds a relative threshold are
// rejected and replaced by the next point of the sequence; `overlapped`
// reports whether that ever happened. Coincident output points mean the
// density is too degenerate to sample and raise ConfigError.
std::vector<Vec2> sample_positions(const GridField& rho0, int N, SampleScheme scheme,
                                   std::uint64_t seed, const GridField* exclude = nullptr,
                                   bool* overlapped = nullptr);

} // namespace spray
