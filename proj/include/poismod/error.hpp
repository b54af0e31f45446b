#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace poismod {

// Base class for all toolkit errors. CLI maps subclasses to exit codes:
// input problems -> 2, numerical failures -> 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed user input (bad manifest, dimension mismatch, unknown coordinate...).
struct InputError : Error {
    using Error::Error;
};

// Numerical breakdown (non-finite values, ODE failure, sampling exhaustion...).
struct NumericalError : Error {
    using Error::Error;
};

struct ParseError : InputError {
    std::size_t offset;
    ParseError(const std::string& msg, std::size_t off)
        : InputError(msg + " (at offset " + std::to_string(off) + ")"), offset(off) {}
};

// Evaluation hit a domain violation; `subexpr` is the offending subexpression, printed.
struct DomainError : NumericalError {
    std::string subexpr;
    DomainError(const std::string& msg, std::string sub)
        : NumericalError(msg + " in '" + sub + "'"), subexpr(std::move(sub)) {}
};

// Could not find sample points satisfying the chart guard.
struct SamplingError : NumericalError {
    using NumericalError::NumericalError;
};

}  // namespace poismod
