#pragma once

#include <functional>
#include <vector>

#include "varcons/fem.hpp"
#include "varcons/flux.hpp"
#include "varcons/mesh.hpp"

namespace varcons {

// Riemann problem for a convex scalar flux: piecewise-constant data with one
// jump at x = 0. Exact solutions are only issued for convex flux; anything
// else is rejected rather than approximated.
struct RiemannProblem {
    double u_left = 0.0;
    double u_right = 0.0;
    FluxModel flux;
};

// Samples second differences of f between the two states and throws
// std::invalid_argument if convexity fails.
void validate_convexity(const RiemannProblem& problem);

// Entropy solution at (t, x): shock with Rankine-Hugoniot speed when
// u_left > u_right, rarefaction fan when u_left < u_right (with (f')^{-1}
// by closed form for burgers, monotone bisection otherwise), constant when
// equal. Values on discontinuity lines are the mean of the two states.
double exact_riemann(const RiemannProblem& problem, double t, double x);

struct GodunovResult {
    std::vector<double> x_centers;
    std::vector<double> times;              // capture instants, ascending
    std::vector<std::vector<double>> states;  // one row of cell averages per time
    double tv_initial = 0.0;
    double tv_max = 0.0;
    int steps = 0;
};

// First-order Godunov scheme with the exact convex-flux interface solver and
// Dirichlet ghost cells holding the Riemann states. Time steps honor the CFL
// number and land exactly on the requested sample times; the final time is
// always captured. Total variation is checked against the initial data every
// step.
GodunovResult godunov_reference(const RiemannProblem& problem,
                                const std::function<double(double)>& u0, int nx,
                                double t_final, double cfl,
                                double x_min = -1.0, double x_max = 1.0,
                                std::vector<double> sample_times = {});

// Quadrature L2 distance between a space-time field and the exact Riemann
// solution, skipping quadrature points within exclude_band (absolute width)
// of the shock line or the two fan edges. Band 0 keeps every point.
double l2_error_vs_exact(const NodalField& field, const RiemannProblem& problem,
                         double exclude_band);

}  // namespace varcons
