#pragma once

#include <stdexcept>
#include <string>

namespace mep {

/// Rejected input: a precondition or type invariant does not hold.
struct InvalidParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to reach its tolerance (message carries the
/// achieved residual or tolerance).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// No admissible solution exists for the given constraints.
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace mep
