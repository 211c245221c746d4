// errors.hpp — exception taxonomy shared by all freqlat modules
#pragma once

#include <stdexcept>
#include <string>

namespace freqlat {

// An operation was called outside its documented domain (bad index, bad shape,
// non-uniform sampling, ...).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A configuration is internally inconsistent or violates a physical invariant.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A protocol failed its own quality gate (e.g. swap fidelity too low).
struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An integrator could not satisfy its step-size contract.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A least-squares fit did not converge.
struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A spectral estimate found no significant peak.
struct EstimationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace freqlat
