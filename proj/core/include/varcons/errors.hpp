#pragma once

#include <stdexcept>
#include <string>

namespace varcons {

// Numerical failure in an iterative or direct solver. Distinct from
// std::invalid_argument, which is reserved for bad inputs and broken
// preconditions that the caller could have checked up front.
class SolveFailure : public std::runtime_error {
public:
    explicit SolveFailure(const std::string& what) : std::runtime_error(what) {}
};

// Newton iteration for the viscous regularization failed to reach the
// requested tolerance. Carries the last residual norm so callers can report
// how close the iteration got before giving up.
class NewtonDivergence : public SolveFailure {
public:
    NewtonDivergence(const std::string& what, double last_residual)
        : SolveFailure(what), last_residual_(last_residual) {}

    double last_residual() const { return last_residual_; }

private:
    double last_residual_;
};

}  // namespace varcons
