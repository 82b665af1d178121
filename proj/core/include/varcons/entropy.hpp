#pragma once

#include <functional>

#include "varcons/defect.hpp"
#include "varcons/fem.hpp"
#include "varcons/flux.hpp"
#include "varcons/mesh.hpp"

namespace varcons {

// Entropy pair (phi, psi): phi convex, psi' = phi' f'. Both derivatives are
// carried explicitly so the compatibility relation can be checked directly.
struct EntropyPair {
    std::function<double(double)> phi;
    std::function<double(double)> phi_prime;
    std::function<double(double)> psi;
    std::function<double(double)> psi_prime;
};

// The square entropy phi = u^2/2 with psi integrated in closed form from the
// flux polynomial (psi' = u f'(u)). For burgers this gives psi = u^3/3.
EntropyPair square_entropy_pair(const FluxModel& flux);

// Samples [z_lo, z_hi] and throws std::invalid_argument if phi fails the
// second-difference convexity test (>= -1e-10) or the compatibility relation
// |psi' - phi' f'| <= 1e-10 fails.
void validate_entropy_pair(const EntropyPair& pair, const FluxModel& flux,
                           double z_lo, double z_hi, int samples = 101);

// Nonnegative smooth test function: product of two 1-D bumps
// b(r) = exp(1 - 1/(1 - r^2)) on |r| < 1, zero outside, centered at
// (center_t, center_x) with half-widths (radius_t, radius_x).
struct SmoothBump {
    double center_t = 0.5;
    double center_x = 0.0;
    double radius_t = 0.4;
    double radius_x = 0.4;

    double value(double t, double x) const;
    double d_t(double t, double x) const;
    double d_x(double t, double x) const;
};

// E_eps(u) = (eps^2/2) integral(u_t^2 + u_x^2) + E(u), the singular
// perturbation whose minimizers solve the viscous equation.
double perturbed_energy(const ProblemData& problem, const NodalField& u, double epsilon,
                        double rel_tol = kDefectRelTolDefault);

// Solves the elliptic viscous regularization
// -eps (u_tt + u_xx) + u_t + f(u)_x = 0 by damped Newton on its FEM weak
// form, with u0 and the lateral values imposed strongly and the natural
// condition at t = t_final. Falls back to continuation from a larger eps if
// the direct iteration diverges; throws NewtonDivergence if that fails too.
NodalField viscous_newton_solve(const ProblemData& problem, double epsilon,
                                double newton_tol, int max_iters = 50);

// Relative discrepancy between the defect of u_eps and eps * u_eps in the
// full H1 norm, minimized over the sign convention:
// min over s in {+1,-1} of ||v - s eps u|| / (eps ||u||). Near-minimizers of
// E_eps should make this small. Throws std::domain_error if u_eps has zero
// H1 norm while its defect does not; the 0/0 case reports 0.
double defect_proportionality_check(const ProblemData& problem, const NodalField& u_eps,
                                    double epsilon,
                                    double rel_tol = kDefectRelTolDefault);

// Weak entropy residual -integral(phi(u) w_t + psi(u) w_x) against the bump
// w. Nonpositive (up to tolerance) for admissible solutions; positive and
// bounded away from zero across entropy-violating shocks. The bump must be
// compactly supported inside the open slab.
double entropy_residual(const NodalField& u, const EntropyPair& pair,
                        const SmoothBump& test);

}  // namespace varcons
