#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "varcons/flux.hpp"

using namespace varcons;

TEST_CASE("burgers flux and derivatives") {
    const FluxModel f = builtin_flux("burgers");
    CHECK(f.name == "burgers");
    CHECK(f.f(2.0) == doctest::Approx(2.0));
    CHECK(f.f(-3.0) == doctest::Approx(4.5));
    CHECK(f.f_prime(2.0) == doctest::Approx(2.0));
    CHECK(f.f_second(7.0) == doctest::Approx(1.0));
    CHECK(f.growth_degree == 2);
    REQUIRE(f.coefficients.size() == 3);
    CHECK(f.coefficients[2] == doctest::Approx(0.5));
}

TEST_CASE("linear flux needs exactly one parameter") {
    const FluxModel f = builtin_flux("linear", {1.5});
    CHECK(f.f(2.0) == doctest::Approx(3.0));
    CHECK(f.f_prime(-8.0) == doctest::Approx(1.5));
    CHECK(f.f_second(1.0) == doctest::Approx(0.0));
    CHECK(f.growth_degree == 1);
    CHECK_THROWS_AS(builtin_flux("linear"), std::invalid_argument);
    CHECK_THROWS_AS(builtin_flux("linear", {1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("polynomial flux evaluates with Horner and exact derivatives") {
    // f(u) = 1 - 2u + 3u^3
    const FluxModel f = builtin_flux("polynomial", {1.0, -2.0, 0.0, 3.0});
    CHECK(f.f(2.0) == doctest::Approx(1.0 - 4.0 + 24.0));
    CHECK(f.f_prime(2.0) == doctest::Approx(-2.0 + 9.0 * 4.0));
    CHECK(f.f_second(2.0) == doctest::Approx(18.0 * 2.0));
    CHECK(f.growth_degree == 3);
    CHECK_THROWS_AS(builtin_flux("polynomial", {}), std::invalid_argument);
    CHECK_THROWS_AS(builtin_flux("polynomial", {1.0, std::nan("")}),
                    std::invalid_argument);
}

TEST_CASE("unknown flux names are rejected") {
    CHECK_THROWS_AS(builtin_flux("cubic-spline"), std::invalid_argument);
}

namespace {

SystemFlux pauli_pair() {
    SystemFlux sys;
    sys.state_dim = 2;
    sys.space_dim = 2;
    sys.jacobian = [](int j, const std::vector<double>&) {
        if (j == 0) return std::vector<double>{1.0, 0.0, 0.0, -1.0};
        return std::vector<double>{0.0, 1.0, 1.0, 0.0};
    };
    return sys;
}

}  // namespace

TEST_CASE("commutation: scalar laws commute with residual zero") {
    SystemFlux scalar;
    scalar.state_dim = 1;
    scalar.space_dim = 3;
    scalar.jacobian = [](int j, const std::vector<double>& u) {
        return std::vector<double>{static_cast<double>(j + 1) * u[0]};
    };
    const CommutationReport report = check_commutation(scalar, {{0.7}, {-2.0}}, 1e-12);
    CHECK(report.commutes);
    CHECK(report.max_residual == 0.0);
}

TEST_CASE("commutation: anticommuting constant pair has residual 2 sqrt 2") {
    const CommutationReport report =
        check_commutation(pauli_pair(), {{0.0, 0.0}, {1.0, -1.0}}, 1e-12);
    CHECK_FALSE(report.commutes);
    CHECK(report.max_residual ==
          doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("commutation: diagonal state-dependent Jacobians commute") {
    SystemFlux diag;
    diag.state_dim = 2;
    diag.space_dim = 2;
    diag.jacobian = [](int j, const std::vector<double>& u) {
        if (j == 0) return std::vector<double>{u[0], 0.0, 0.0, u[1]};
        return std::vector<double>{std::sin(u[1]), 0.0, 0.0, u[0] * u[0]};
    };
    const CommutationReport report =
        check_commutation(diag, {{0.5, -0.3}, {1.1, 0.2}}, 1e-12);
    CHECK(report.commutes);
    CHECK(report.max_residual <= 1e-15);
}

TEST_CASE("commutation checker validates its input") {
    CHECK_THROWS_AS(check_commutation(pauli_pair(), {}, 1e-12), std::invalid_argument);

    SystemFlux bad = pauli_pair();
    bad.jacobian = [](int, const std::vector<double>&) {
        return std::vector<double>{1.0, 2.0, 3.0};  // not N x N
    };
    CHECK_THROWS_AS(check_commutation(bad, {{0.0, 0.0}}, 1e-12), std::invalid_argument);

    SystemFlux degenerate = pauli_pair();
    degenerate.state_dim = 0;
    CHECK_THROWS_AS(check_commutation(degenerate, {{0.0, 0.0}}, 1e-12),
                    std::invalid_argument);
}
