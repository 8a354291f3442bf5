#pragma once

#include <stdexcept>
#include <string>

namespace dce {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration. `field` is a dotted path into the
/// run configuration when the error came from parsing, otherwise empty.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message, std::string field = {})
        : Error(field.empty() ? message : field + ": " + message), message_(message),
          field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }
    /// The message without the field prefix.
    const std::string& message() const noexcept { return message_; }

private:
    std::string message_;
    std::string field_;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class StateError : public Error {
public:
    using Error::Error;
};

/// Base for failures of a numerical procedure (integrator, quadrature,
/// convergence ladders).
class NumericalError : public Error {
public:
    using Error::Error;
};

class StiffnessError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class IntegrationQualityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NonConvergenceError : public NumericalError {
public:
    NonConvergenceError(const std::string& message, double residual)
        : NumericalError(message), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class QuadratureError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace dce
