#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mls {

/// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
    InvalidArgument = 1,
    Data = 2,
    Numerical = 3,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Bad parameters: out-of-range indices, sizes, levels, unknown names.
class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(ErrorKind::InvalidArgument, what) {}
};

/// Bad input data: malformed files, non-finite values, degenerate chains.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

/// An iterative solver hit its iteration cap. Carries the best iterate seen.
class ConvergenceError : public NumericalError {
public:
    ConvergenceError(const std::string& what, std::vector<double> best, double residual)
        : NumericalError(what), best_(std::move(best)), residual_(residual) {}

    [[nodiscard]] const std::vector<double>& best_iterate() const noexcept { return best_; }
    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    std::vector<double> best_;
    double residual_;
};

}  // namespace mls
