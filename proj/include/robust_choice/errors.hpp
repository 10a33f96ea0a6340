#pragma once

#include <stdexcept>
#include <string>

namespace robust_choice {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Two objects that must live on the same state space do not.
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error(what) {}
};

/// An argument is outside its mathematical domain (negative lambda,
/// alpha outside [0,1], degenerate bet, ...).
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what) {}
};

/// Structural problem in an input document (missing key, wrong type).
/// Carries a JSON-pointer style path to the offending location.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::string path)
        : Error(path.empty() ? what : what + " at " + path), path_(std::move(path)) {}

    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// Well-formed input whose values violate the schema (negative weight,
/// non-positive lambda, dangling model reference).
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

/// An iterative routine failed to locate its answer within its budget.
class ConvergenceError : public Error {
public:
    explicit ConvergenceError(const std::string& what) : Error(what) {}
};

} // namespace robust_choice
