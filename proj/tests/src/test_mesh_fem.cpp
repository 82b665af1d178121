#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "varcons/errors.hpp"
#include "varcons/fem.hpp"
#include "varcons/mesh.hpp"
#include "varcons_run/oracles.hpp"

using namespace varcons;
using varcons::cli::dense_apply_final_time_constraint;
using varcons::cli::dense_is_spd;
using varcons::cli::dense_solve;
using varcons::cli::dense_stiffness;
using varcons::cli::random_field;

TEST_CASE("mesh numbering and coordinates") {
    const SpaceTimeMesh mesh = build_mesh(3, 5, 2.0, -1.0, 1.5);
    CHECK(mesh.num_nodes() == 4 * 6);
    CHECK(mesh.num_elements() == 15);
    CHECK(mesh.node_index(0, 0) == 0);
    CHECK(mesh.node_index(0, 5) == 5);
    CHECK(mesh.node_index(1, 0) == 6);
    CHECK(mesh.node_index(3, 5) == 23);
    CHECK(mesh.node_t(0) == doctest::Approx(0.0));
    CHECK(mesh.node_t(3) == doctest::Approx(2.0));
    CHECK(mesh.node_x(0) == doctest::Approx(-1.0));
    CHECK(mesh.node_x(5) == doctest::Approx(1.5));
    CHECK(mesh.dt() == doctest::Approx(2.0 / 3.0));
    CHECK(mesh.dx() == doctest::Approx(2.5 / 5.0));

    const auto nodes = mesh.element_nodes(1, 2);
    CHECK(nodes[0] == mesh.node_index(1, 2));
    CHECK(nodes[1] == mesh.node_index(1, 3));
    CHECK(nodes[2] == mesh.node_index(2, 2));
    CHECK(nodes[3] == mesh.node_index(2, 3));
}

TEST_CASE("build_mesh rejects degenerate input") {
    CHECK_THROWS_AS(build_mesh(0, 4, 1.0, -1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_mesh(4, 0, 1.0, -1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_mesh(4, 4, 0.0, -1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_mesh(4, 4, 1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(build_mesh(4, 4, -1.0, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("reference shapes form a partition of unity") {
    const double xi = 0.37, eta = -0.61;
    double sum = 0.0, sum_dxi = 0.0, sum_deta = 0.0;
    for (int k = 0; k < 4; ++k) {
        sum += reference_shape(k, xi, eta);
        sum_dxi += reference_shape_dxi(k, xi, eta);
        sum_deta += reference_shape_deta(k, xi, eta);
    }
    CHECK(sum == doctest::Approx(1.0));
    CHECK(sum_dxi == doctest::Approx(0.0));
    CHECK(sum_deta == doctest::Approx(0.0));
    // Kronecker property at the corners.
    for (int k = 0; k < 4; ++k) {
        for (int m = 0; m < 4; ++m) {
            const double val = reference_shape(k, kRefXi[m], kRefEta[m]);
            CHECK(val == doctest::Approx(k == m ? 1.0 : 0.0));
        }
    }
}

TEST_CASE("gauss rules integrate low-order polynomials exactly") {
    double area = 0.0, x2y2 = 0.0;
    for (const auto& q : gauss_2x2()) {
        area += q.weight;
        x2y2 += q.weight * q.xi * q.xi * q.eta * q.eta;
    }
    CHECK(area == doctest::Approx(4.0));
    CHECK(x2y2 == doctest::Approx(4.0 / 9.0));

    double len = 0.0, s2 = 0.0;
    for (const auto& [point, weight] : gauss_edge()) {
        len += weight;
        s2 += weight * point * point;
    }
    CHECK(len == doctest::Approx(2.0));
    CHECK(s2 == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("sparse stiffness matches dense closed-form assembly") {
    for (const auto& [nt, nx] : {std::pair{3, 5}, std::pair{8, 8}}) {
        const SpaceTimeMesh mesh = build_mesh(nt, nx, 1.7, -0.4, 2.1);
        const SparseSpdSystem system = assemble_stiffness(mesh);
        const std::vector<double> dense = dense_stiffness(mesh);
        const int n = mesh.num_nodes();
        REQUIRE(system.matrix.n == n);
        double worst = 0.0;
        for (int r = 0; r < n; ++r) {
            std::vector<double> row(static_cast<size_t>(n), 0.0);
            for (int idx = system.matrix.row_ptr[r]; idx < system.matrix.row_ptr[r + 1];
                 ++idx) {
                row[static_cast<size_t>(system.matrix.col[idx])] = system.matrix.val[idx];
            }
            for (int c = 0; c < n; ++c) {
                worst = std::max(worst,
                                 std::abs(row[static_cast<size_t>(c)] -
                                          dense[static_cast<size_t>(r) * n + c]));
            }
        }
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("final-time constraint is idempotent and produces an SPD matrix") {
    const SpaceTimeMesh mesh = build_mesh(4, 6, 1.0, -1.0, 1.0);
    SparseSpdSystem system = assemble_stiffness(mesh);
    system.rhs.assign(static_cast<size_t>(mesh.num_nodes()), 1.0);
    const SparseSpdSystem once = apply_final_time_constraint(system);
    const SparseSpdSystem twice = apply_final_time_constraint(once);
    CHECK(once.final_time_constrained);
    CHECK(once.matrix.val == twice.matrix.val);
    CHECK(once.rhs == twice.rhs);
    for (int j = 0; j <= mesh.nx; ++j) {
        CHECK(once.rhs[static_cast<size_t>(mesh.node_index(mesh.nt, j))] == 0.0);
        CHECK(is_final_time_node(mesh, mesh.node_index(mesh.nt, j)));
    }
    CHECK_FALSE(is_final_time_node(mesh, mesh.node_index(0, 0)));

    std::vector<double> dense = dense_stiffness(mesh);
    std::vector<double> rhs(static_cast<size_t>(mesh.num_nodes()), 0.0);
    dense_apply_final_time_constraint(mesh, dense, rhs);
    CHECK(dense_is_spd(dense, mesh.num_nodes()));
}

TEST_CASE("conjugate gradients matches the dense direct solve") {
    const SpaceTimeMesh mesh = build_mesh(6, 7, 1.3, -1.0, 1.0);
    SparseSpdSystem system = assemble_stiffness(mesh);
    const NodalField load = random_field(mesh, 99);
    system.rhs = load.values;
    system = apply_final_time_constraint(std::move(system));

    const NodalField x = solve_spd(system, 1e-13);

    std::vector<double> dense = dense_stiffness(mesh);
    std::vector<double> rhs = load.values;
    dense_apply_final_time_constraint(mesh, dense, rhs);
    const std::vector<double> x_dense = dense_solve(std::move(dense), std::move(rhs));

    double num = 0.0, den = 0.0;
    for (size_t a = 0; a < x_dense.size(); ++a) {
        num += (x.values[a] - x_dense[a]) * (x.values[a] - x_dense[a]);
        den += x_dense[a] * x_dense[a];
    }
    CHECK(std::sqrt(num / den) <= 1e-10);

    // Constrained entries stay exactly zero.
    for (int j = 0; j <= mesh.nx; ++j) {
        CHECK(x.values[static_cast<size_t>(mesh.node_index(mesh.nt, j))] == 0.0);
    }
}

TEST_CASE("cg refuses unconstrained systems and zero rhs short-circuits") {
    const SpaceTimeMesh mesh = build_mesh(3, 3, 1.0, -1.0, 1.0);
    SparseSpdSystem system = assemble_stiffness(mesh);
    system.rhs.assign(static_cast<size_t>(mesh.num_nodes()), 0.0);
    CHECK_THROWS_AS(solve_spd(system, 1e-10), std::invalid_argument);

    system = apply_final_time_constraint(std::move(system));
    const NodalField x = solve_spd(system, 1e-10);
    for (double v : x.values) CHECK(v == 0.0);
}

TEST_CASE("warm start and jacobi preconditioning preserve the solution") {
    const SpaceTimeMesh mesh = build_mesh(5, 5, 1.0, -1.0, 1.0);
    SparseSpdSystem system = assemble_stiffness(mesh);
    system.rhs = random_field(mesh, 7).values;
    system = apply_final_time_constraint(std::move(system));

    const NodalField base = solve_spd(system, 1e-13);

    CgOptions opts;
    opts.rel_tol = 1e-13;
    opts.jacobi_preconditioner = true;
    const NodalField jacobi = solve_spd(system, opts);

    NodalField guess = base;
    guess.values[5] += 0.1;
    CgOptions warm;
    warm.rel_tol = 1e-13;
    warm.warm_start = &guess;
    const NodalField warmed = solve_spd(system, warm);

    for (size_t a = 0; a < base.values.size(); ++a) {
        CHECK(jacobi.values[a] == doctest::Approx(base.values[a]).epsilon(1e-9));
        CHECK(warmed.values[a] == doctest::Approx(base.values[a]).epsilon(1e-9));
    }
}

TEST_CASE("lumped mass sums to the slab area and pairings are consistent") {
    const SpaceTimeMesh mesh = build_mesh(4, 9, 1.5, -2.0, 1.0);
    const std::vector<double> mass = lumped_mass_vector(mesh);
    double total = 0.0;
    for (double m : mass) {
        CHECK(m > 0.0);
        total += m;
    }
    CHECK(total == doctest::Approx(1.5 * 3.0));

    // integrate_h1_pairing(a, b) must equal a^T K b with the same quadrature.
    const NodalField a = random_field(mesh, 1);
    const NodalField b = random_field(mesh, 2);
    const std::vector<double> kb = stiffness_apply(b);
    double atkb = 0.0;
    for (size_t i = 0; i < kb.size(); ++i) atkb += a.values[i] * kb[i];
    CHECK(integrate_h1_pairing(a, b) == doctest::Approx(atkb).epsilon(1e-12));

    // And stiffness_apply must agree with the assembled matrix action.
    const SparseSpdSystem system = assemble_stiffness(mesh);
    const std::vector<double> kb2 = system.matrix.multiply(b.values);
    for (size_t i = 0; i < kb.size(); ++i) {
        CHECK(kb[i] == doctest::Approx(kb2[i]).epsilon(1e-12));
    }
}

TEST_CASE("derivatives of an affine field are exact at quadrature points") {
    const SpaceTimeMesh mesh = build_mesh(5, 4, 1.2, -1.0, 0.5);
    const NodalField u =
        interpolate_function(mesh, [](double t, double x) { return 2.0 * t - 3.0 * x + 1.0; });
    const QuadDerivatives d = field_derivatives(u);
    for (double dt : d.d_t) CHECK(dt == doctest::Approx(2.0));
    for (double dx : d.d_x) CHECK(dx == doctest::Approx(-3.0));

    const std::vector<double> vals = quad_values(u);
    CHECK(vals.size() == static_cast<size_t>(mesh.num_elements()) * 4);

    // H1 seminorm of the affine field integrates (4 + 9) over the slab.
    const double pairing = integrate_h1_pairing(u, u);
    CHECK(pairing == doctest::Approx(13.0 * 1.2 * 1.5));
}

TEST_CASE("lumped l2 and h1 norms behave like norms") {
    const SpaceTimeMesh mesh = build_mesh(4, 4, 1.0, -1.0, 1.0);
    const NodalField one(mesh, 1.0);
    CHECK(lumped_l2_norm(one) == doctest::Approx(std::sqrt(2.0)));
    CHECK(h1_norm(one) == doctest::Approx(std::sqrt(2.0)));  // constant: no seminorm part
    const NodalField zero(mesh);
    CHECK(lumped_l2_norm(zero) == 0.0);
    CHECK(lumped_l2_pairing(one, zero) == 0.0);
}

TEST_CASE("interpolate_function rejects non-finite samples") {
    const SpaceTimeMesh mesh = build_mesh(2, 2, 1.0, -1.0, 1.0);
    CHECK_THROWS_AS(
        interpolate_function(mesh, [](double, double) { return std::nan(""); }),
        std::invalid_argument);
}

TEST_CASE("random fields are reproducible and seed-sensitive") {
    const SpaceTimeMesh mesh = build_mesh(3, 3, 1.0, -1.0, 1.0);
    const NodalField a = random_field(mesh, 42);
    const NodalField b = random_field(mesh, 42);
    const NodalField c = random_field(mesh, 43);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
    for (double v : a.values) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
    // Frozen first draw for seed 42: documents the generator contract; any
    // change to the transform is a deliberate break of artifact determinism.
    CHECK(a.values[0] == doctest::Approx(0.51031106590907793).epsilon(1e-15));
}
