#pragma once

#include <stdexcept>
#include <string>

namespace vsmooth {

/// A numeric parameter lies outside the range an operation is defined on
/// (step sizes, smoothing parameters, regularizer shapes).
class ParameterDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Inputs violate a structural contract: mismatched dimensions, points
/// outside the declared subspace.
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DegenerateInputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The operation is not supported at this size (brute-force oracles).
class CapabilityError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InternalConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// An iterative method hit its iteration cap. Carries the last residual.
class NonconvergenceError : public std::runtime_error {
public:
    NonconvergenceError(const std::string& what, double last_residual)
        : std::runtime_error(what + " (last residual " + std::to_string(last_residual) + ")"),
          residual_(last_residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

}  // namespace vsmooth
