#pragma once

#include <stdexcept>
#include <string>

namespace rdness {

/// Argument outside the mathematical domain of a function (rho outside [0,1], r <= 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A size guard was violated (box too large for the torus, state space too big, ...).
class SizeError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Invalid model or run parameters.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Two routes that must agree did not. Indicates a bug, never a user error.
class ConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Numerical procedure failed (singular solve, tolerance not reached).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File or stream I/O failure.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rdness
