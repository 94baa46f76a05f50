#ifndef FLASHSIM_ERRORS_HPP
#define FLASHSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace flashsim {

// Base for every error the library raises on contract violations.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Dimension overflow or basis-tag mismatch between operands.
struct SizeError : Error {
    using Error::Error;
};

// A precondition on an operator was violated (e.g. non-Hermitian input
// where a Hermitian matrix is required).
struct ContractError : Error {
    using Error::Error;
};

// Operation applied to a state of zero norm.
struct DegenerateStateError : Error {
    using Error::Error;
};

// A collapse annihilated every amplitude.
struct DegenerateOutcomeError : Error {
    using Error::Error;
};

// Probability mass underflowed double precision.
struct UnderflowError : Error {
    using Error::Error;
};

// Boundary conditioning is numerically infeasible (Z underflow).
struct ConditioningError : Error {
    using Error::Error;
};

// Fock truncation leaked population above the monitored threshold.
struct TruncationLeakageError : Error {
    using Error::Error;
};

// Foliation enumeration would exceed the configured cap.
struct EnumerationError : Error {
    using Error::Error;
};

// Replay was asked to cross an event with no assigned outcome, or a cut
// violated the lattice constraints.
struct ReplayError : Error {
    using Error::Error;
};

// Configuration file failed strict validation.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace flashsim

#endif
