#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace airs {

/// Thrown when an argument violates a documented precondition.
class InvalidInputError : public std::invalid_argument {
public:
    explicit InvalidInputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Thrown when an iterative routine exhausts its iteration budget.
/// Carries the last residual and, when available, the objective trace.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual,
                     std::vector<double> trace = {})
        : std::runtime_error(what), residual_(residual), trace_(std::move(trace)) {}

    double residual() const { return residual_; }
    const std::vector<double>& trace() const { return trace_; }

private:
    double residual_;
    std::vector<double> trace_;
};

/// Thrown when an effective channel vanishes and a beamformer direction
/// is undefined.
class DegenerateChannelError : public std::runtime_error {
public:
    explicit DegenerateChannelError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a power budget leaves no feasible operating point.
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when a formula is evaluated at a boundary value it excludes.
class BoundaryError : public std::domain_error {
public:
    explicit BoundaryError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace airs
