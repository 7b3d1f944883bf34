#pragma once

#include <mutex>

#include "spraylab/grid.hpp"

namespace spray {

namespace detail {
// FFTW plan creation/destruction is not thread safe; every translation unit
// that builds plans serializes on this lock. Executing distinct plans is fine.
std::mutex& fftw_plan_mutex();
}

// Box-spectral Sobolev norm on [-L, L]^2 with periodic modes k = (pi/L) m:
//   ( sum_k (1 + |k|^2)^s |f_hat_k|^2 )^(1/2),
// normalized so s = 0 reproduces the grid L2 norm. This is a surrogate for
// the whole-plane norm; no equivalence constant is claimed. Vector fields
// sum the component squares. s must lie in [-6, 6].
double sobolev_norm(const GridField& f, double s);

} // namespace spray
