#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace redgraf {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class EmptyInputError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Raised when an exhaustive graph check would exceed its node limit.
class SizeLimitError : public Error {
public:
    using Error::Error;
};

class StateError : public Error {
public:
    using Error::Error;
};

/// Floating-point failure of an otherwise well-posed computation.
class NumericalError : public Error {
public:
    NumericalError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::size_t round)
        : Error(what + " at round " + std::to_string(round)), round_(round) {}
    std::size_t round() const noexcept { return round_; }

private:
    std::size_t round_;
};

class FitError : public Error {
public:
    using Error::Error;
};

/// Malformed text input. Line numbers are 1-based; 0 means "not line specific".
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace redgraf
