#pragma once

#include <stdexcept>
#include <string>

namespace cardiobif {

// Invalid inputs: unknown names, malformed files, out-of-contract arguments.
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Configuration problems; message carries the offending field path.
class ConfigError : public DomainError {
public:
    using DomainError::DomainError;
};

// Numerical blow-up during time integration.
class IntegrationDiverged : public std::runtime_error {
public:
    IntegrationDiverged(const std::string& msg, double t_fail, long cell_index = -1)
        : std::runtime_error(msg), t(t_fail), cell(cell_index) {}
    double t;
    long cell; // -1 for single-cell integrations
};

// Newton iteration did not converge; carries the last residual.
class NewtonFailure : public std::runtime_error {
public:
    NewtonFailure(const std::string& msg, double last_residual, int iterations)
        : std::runtime_error(msg), residual(last_residual), iters(iterations) {}
    double residual;
    int iters;
};

// Linear solve hit a (numerically) singular Jacobian.
class SingularJacobian : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace cardiobif
