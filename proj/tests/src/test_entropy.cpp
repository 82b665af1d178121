#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "varcons/defect.hpp"
#include "varcons/entropy.hpp"
#include "varcons/errors.hpp"
#include "varcons/fem.hpp"
#include "varcons/riemann.hpp"
#include "varcons_run/oracles.hpp"

using namespace varcons;
using varcons::cli::random_field;

namespace {

ProblemData riemann_problem_data(int n, double uL, double uR) {
    ProblemData problem;
    problem.mesh = build_mesh(n, n, 1.0, -1.0, 1.0);
    problem.flux = builtin_flux("burgers");
    problem.u0 = [uL, uR](double x) {
        return x < 0.0 ? uL : x > 0.0 ? uR : 0.5 * (uL + uR);
    };
    problem.u_left = [uL](double) { return uL; };
    problem.u_right = [uR](double) { return uR; };
    return problem;
}

NodalField stationary_jump(const SpaceTimeMesh& mesh, double uL, double uR) {
    return interpolate_function(mesh, [uL, uR](double, double x) {
        return x < 0.0 ? uL : x > 0.0 ? uR : 0.5 * (uL + uR);
    });
}

}  // namespace

TEST_CASE("square entropy pair for burgers is (u^2/2, u^3/3)") {
    const EntropyPair pair = square_entropy_pair(builtin_flux("burgers"));
    for (double u : {-2.0, -0.5, 0.0, 1.3}) {
        CHECK(pair.phi(u) == doctest::Approx(0.5 * u * u));
        CHECK(pair.phi_prime(u) == doctest::Approx(u));
        CHECK(pair.psi(u) == doctest::Approx(u * u * u / 3.0));
        CHECK(pair.psi_prime(u) == doctest::Approx(u * u));
    }
    validate_entropy_pair(pair, builtin_flux("burgers"), -2.0, 2.0);
}

TEST_CASE("square entropy pair respects general polynomial fluxes") {
    // f = 2u + u^3: psi' = u f' = 2u + 3u^3, psi = u^2 + (3/4) u^4.
    const FluxModel flux = builtin_flux("polynomial", {0.0, 2.0, 0.0, 1.0});
    const EntropyPair pair = square_entropy_pair(flux);
    for (double u : {-1.0, 0.25, 2.0}) {
        CHECK(pair.psi_prime(u) == doctest::Approx(2.0 * u + 3.0 * u * u * u));
        CHECK(pair.psi(u) == doctest::Approx(u * u + 0.75 * u * u * u * u));
    }
    validate_entropy_pair(pair, flux, -2.0, 2.0);
}

TEST_CASE("entropy pair validation rejects broken pairs") {
    const FluxModel flux = builtin_flux("burgers");
    EntropyPair bad = square_entropy_pair(flux);
    bad.psi_prime = [](double u) { return u * u + 0.1; };  // breaks psi' = phi' f'
    CHECK_THROWS_AS(validate_entropy_pair(bad, flux, -1.0, 1.0), std::invalid_argument);

    EntropyPair concave = square_entropy_pair(flux);
    concave.phi = [](double u) { return -u * u; };
    CHECK_THROWS_AS(validate_entropy_pair(concave, flux, -1.0, 1.0),
                    std::invalid_argument);
}

TEST_CASE("smooth bump is compactly supported with exact derivatives") {
    SmoothBump bump;
    bump.center_t = 0.5;
    bump.center_x = 0.1;
    bump.radius_t = 0.3;
    bump.radius_x = 0.25;

    CHECK(bump.value(0.5, 0.1) == doctest::Approx(1.0));
    CHECK(bump.value(0.5 + 0.3, 0.1) == 0.0);
    CHECK(bump.value(0.5, 0.1 - 0.25) == 0.0);
    CHECK(bump.value(0.9, 0.9) == 0.0);
    CHECK(bump.value(0.6, 0.2) > 0.0);

    const double h = 1e-6;
    for (const auto& [t, x] : {std::pair{0.55, 0.15}, std::pair{0.42, 0.0}}) {
        const double fd_t = (bump.value(t + h, x) - bump.value(t - h, x)) / (2.0 * h);
        const double fd_x = (bump.value(t, x + h) - bump.value(t, x - h)) / (2.0 * h);
        CHECK(bump.d_t(t, x) == doctest::Approx(fd_t).epsilon(1e-6));
        CHECK(bump.d_x(t, x) == doctest::Approx(fd_x).epsilon(1e-6));
    }
}

TEST_CASE("perturbed energy adds the scaled seminorm to the defect energy") {
    const ProblemData problem = riemann_problem_data(10, 1.0, -1.0);
    const NodalField u = random_field(problem.mesh, 12);
    const double eps = 0.3;
    const double expected = 0.5 * eps * eps * integrate_h1_pairing(u, u) +
                            compute_defect(problem, u).energy;
    CHECK(perturbed_energy(problem, u, eps) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(perturbed_energy(problem, u, 0.0) ==
          doctest::Approx(compute_defect(problem, u).energy).epsilon(1e-12));
}

TEST_CASE("viscous solve imposes the data and smooths the shock") {
    const ProblemData problem = riemann_problem_data(24, 1.0, -1.0);
    const NodalField u = viscous_newton_solve(problem, 0.2, 1e-10);
    const SpaceTimeMesh& mesh = problem.mesh;

    for (int j = 0; j <= mesh.nx; ++j) {
        CHECK(u(0, j) == doctest::Approx(problem.u0(mesh.node_x(j))));
    }
    for (int i = 0; i <= mesh.nt; ++i) {
        CHECK(u(i, 0) == doctest::Approx(1.0));
        CHECK(u(i, mesh.nx) == doctest::Approx(-1.0));
    }
    // The viscous profile at the final time decreases monotonically in x.
    for (int j = 0; j < mesh.nx; ++j) {
        CHECK(u(mesh.nt, j) >= u(mesh.nt, j + 1) - 1e-12);
    }
    for (double v : u.values) CHECK(std::isfinite(v));
}

TEST_CASE("viscous newton reports divergence instead of looping") {
    const ProblemData problem = riemann_problem_data(12, 1.0, -1.0);
    try {
        (void)viscous_newton_solve(problem, 0.05, 1e-14, 1);
        FAIL("expected NewtonDivergence");
    } catch (const NewtonDivergence& err) {
        CHECK(err.last_residual() > 0.0);
        CHECK(std::string(err.what()).size() > 0);
    }
}

TEST_CASE("tightening newton_tol tightens the proportionality identity") {
    const ProblemData problem = riemann_problem_data(32, 1.0, -1.0);
    const double eps = 0.05;
    const NodalField loose = viscous_newton_solve(problem, eps, 1e-6);
    const NodalField tight = viscous_newton_solve(problem, eps, 1e-10);
    const double d_loose = defect_proportionality_check(problem, loose, eps, 1e-12);
    const double d_tight = defect_proportionality_check(problem, tight, eps, 1e-12);
    CHECK(d_tight < d_loose);

    // Frozen level for this mesh and eps: the discrepancy is dominated by
    // the structural gap between the defect's final-time constraint and the
    // viscous equation's natural condition, not by solver error.
    CHECK(d_tight == doctest::Approx(0.499277).epsilon(2e-3));
}

TEST_CASE("proportionality check handles degenerate inputs per contract") {
    ProblemData problem = riemann_problem_data(8, 1.0, -1.0);

    // Zero field with nonzero data: defect nonzero while u vanishes.
    CHECK_THROWS_AS(
        defect_proportionality_check(problem, NodalField(problem.mesh), 0.1),
        std::domain_error);

    // Fully zero problem: 0/0 reports 0 by convention.
    ProblemData trivial = problem;
    trivial.u0 = [](double) { return 0.0; };
    trivial.u_left = [](double) { return 0.0; };
    trivial.u_right = [](double) { return 0.0; };
    CHECK(defect_proportionality_check(trivial, NodalField(trivial.mesh), 0.1) == 0.0);
}

TEST_CASE("entropy residual separates admissible from violating shocks") {
    const FluxModel flux = builtin_flux("burgers");
    const EntropyPair pair = square_entropy_pair(flux);
    const SmoothBump bump;  // centered at (0.5, 0) with radii 0.4
    const SpaceTimeMesh mesh = build_mesh(64, 64, 1.0, -1.0, 1.0);

    const double r_adm = entropy_residual(stationary_jump(mesh, 1.0, -1.0), pair, bump);
    const double r_vio = entropy_residual(stationary_jump(mesh, -1.0, 1.0), pair, bump);

    // Frozen from an independent prototype at this resolution: -+0.3205.
    CHECK(r_adm == doctest::Approx(-0.3205).epsilon(2e-3));
    CHECK(r_vio == doctest::Approx(0.3205).epsilon(2e-3));
    CHECK(r_adm < 0.0);
    CHECK(r_vio > 0.0);

    // Negating u negates psi and kills no phi term for these stationary
    // fields, so the two residuals are exact negatives up to rounding.
    CHECK(std::abs(r_adm + r_vio) <= 1e-10);
}

TEST_CASE("entropy residual requires the bump inside the open slab") {
    const FluxModel flux = builtin_flux("burgers");
    const EntropyPair pair = square_entropy_pair(flux);
    const SpaceTimeMesh mesh = build_mesh(8, 8, 1.0, -1.0, 1.0);
    const NodalField u = stationary_jump(mesh, 1.0, -1.0);

    SmoothBump touching;
    touching.center_t = 0.5;
    touching.radius_t = 0.5;  // support touches t = 0 and t = 1
    CHECK_THROWS_AS(entropy_residual(u, pair, touching), std::invalid_argument);

    SmoothBump wide;
    wide.radius_x = 1.2;  // sticks out of the lateral boundary
    CHECK_THROWS_AS(entropy_residual(u, pair, wide), std::invalid_argument);
}
