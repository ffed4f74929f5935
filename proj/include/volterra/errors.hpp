#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace volterra {

// Numerical failure inside an algorithm that received valid inputs:
// series hit its term cap, an iteration diverged, a factorization failed.
// Domain errors on inputs use std::domain_error / std::invalid_argument.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Iterative scheme exhausted its iteration budget. Carries the per-iteration
// sup-norm deltas so the caller can report the convergence history.
class ConvergenceError : public NumericError {
public:
    ConvergenceError(const std::string& what, std::vector<double> deltas)
        : NumericError(what), deltas_(std::move(deltas)) {}

    const std::vector<double>& deltas() const noexcept { return deltas_; }

private:
    std::vector<double> deltas_;
};

// Invalid configuration value or unknown key. Message names the offending field.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace volterra
