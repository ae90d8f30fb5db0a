#pragma once

#include <stdexcept>
#include <string>

namespace padefreq {

/// Raised when an input violates a documented domain (bad N, |delta| > 0.5, ...).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised on numerical faults: zero signal energy, unconverged coefficients,
/// a cubic without a usable real root.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace padefreq
