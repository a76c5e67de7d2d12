#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace binscreen {

/// Argument outside the mathematical domain of an operation (negative
/// variance, non-finite input, n too small, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Malformed input: dimension mismatch, bad covariance, bad data.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Linear system could not be solved (singular or rank-deficient).
class SingularMatrix : public std::runtime_error {
public:
    SingularMatrix(const std::string& what, std::vector<int> columns = {})
        : std::runtime_error(what), columns_(std::move(columns)) {}

    /// Offending column indices (0-based) when known.
    const std::vector<int>& columns() const noexcept { return columns_; }

private:
    std::vector<int> columns_;
};

/// Iterative solver gave up; carries the last iterate.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, std::vector<double> last_iterate)
        : std::runtime_error(what), last_(std::move(last_iterate)) {}

    const std::vector<double>& last_iterate() const noexcept { return last_; }

private:
    std::vector<double> last_;
};

/// An internal consistency check failed. Indicates a bug, not bad input.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace binscreen
