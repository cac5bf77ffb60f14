#pragma once

#include <stdexcept>
#include <string>

namespace impactosc {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of a map (e.g. ρ ≤ 0, the origin).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A parameter is outside the large-energy regime where a construction is valid.
class RegimeError : public Error {
public:
    using Error::Error;
};

/// An iterative method failed to converge or two independent routes disagree.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Step size fell below the representable minimum.
class StiffnessError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Two backends computing the same map disagree beyond the allowed limit.
class ConsistencyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Contact with the barrier at (numerically) zero speed.
class DegenerateContactError : public Error {
public:
    using Error::Error;
};

/// No impact occurred before the escape time cap.
class EscapeError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace impactosc
