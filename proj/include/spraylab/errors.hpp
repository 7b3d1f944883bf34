#pragma once

#include <stdexcept>
#include <string>

namespace spray {

// Bad or inconsistent user input (config file, CLI arguments, malformed
// run directory). CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical precondition failed mid-run (support reached the box edge,
// CFL violated, particle collision, non-finite field). CLI maps this to
// exit code 3. Carries the simulation time when known.
struct NumericalAbort : std::runtime_error {
    explicit NumericalAbort(const std::string& what, double when = -1.0)
        : std::runtime_error(what), t(when) {}
    double t;
};

struct SupportViolation : NumericalAbort {
    using NumericalAbort::NumericalAbort;
};

struct CflViolation : NumericalAbort {
    using NumericalAbort::NumericalAbort;
};

struct CollisionError : NumericalAbort {
    using NumericalAbort::NumericalAbort;
};

// A structural invariant that should hold for any run was found broken
// (conservation, nonnegativity, format self-checks). CLI maps this to
// exit code 4.
struct InvariantViolation : std::runtime_error {
    explicit InvariantViolation(const std::string& what) : std::runtime_error(what) {}
};

} // namespace spray
