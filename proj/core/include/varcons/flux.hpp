#pragma once

#include <functional>
#include <string>
#include <vector>

namespace varcons {

// Scalar flux model. All built-in fluxes are polynomials, so exact first and
// second derivatives are available; the second derivative feeds the Newton
// Jacobian of the viscous regularization and the entropy-pair construction.
struct FluxModel {
    std::string name;
    std::function<double(double)> f;
    std::function<double(double)> f_prime;
    std::function<double(double)> f_second;
    // Polynomial coefficients, constant term first. Non-empty for every
    // built-in model; consumers that need closed-form antiderivatives (the
    // entropy pair) read these instead of sampling f.
    std::vector<double> coefficients;
    int growth_degree = 1;
};

// Built-in models: "burgers" (f = u^2/2, no params), "linear" (f = a u,
// params = {a}), "polynomial" (params = coefficients, constant term first).
FluxModel builtin_flux(const std::string& name, const std::vector<double>& params = {});

// Multi-dimensional system flux described only through its Jacobians:
// jacobian(j, u) returns the N x N matrix of the directional flux for
// j in [0, space_dim), row-major. Used solely by the commutation checker.
struct SystemFlux {
    int state_dim = 1;   // N
    int space_dim = 1;   // n
    std::function<std::vector<double>(int j, const std::vector<double>& u)> jacobian;
};

struct CommutationReport {
    double max_residual = 0.0;
    bool commutes = true;
};

// Checks the pairwise-commutation condition on the given sample states:
// max over samples and pairs (j, k) of the Frobenius norm of
// Df_(j) Df_(k) - Df_(k) Df_(j). The condition quantifies over all states,
// so sampling is a falsification check, not a proof.
CommutationReport check_commutation(const SystemFlux& sys,
                                    const std::vector<std::vector<double>>& sample_states,
                                    double tol);

}  // namespace varcons
