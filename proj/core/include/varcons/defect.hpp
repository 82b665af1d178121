#pragma once

#include <functional>
#include <vector>

#include "varcons/fem.hpp"
#include "varcons/flux.hpp"
#include "varcons/mesh.hpp"

namespace varcons {

inline constexpr double kDefectRelTolDefault = 1e-10;

// Conservation-law problem on the space-time slab: flux, initial datum at
// t = 0, and lateral boundary values at x_min and x_max. Data enter the
// formulation only weakly, through load-vector terms; no nodal value of a
// candidate field is ever constrained by the data.
struct ProblemData {
    FluxModel flux;
    std::function<double(double)> u0;       // of x
    std::function<double(double)> u_left;   // of t
    std::function<double(double)> u_right;  // of t
    SpaceTimeMesh mesh;
};

// Defect of a candidate field u: the unique v, vanishing at t = t_final,
// with integral(v_t w_t + v_x w_x) matching the weak residual of u against
// every test function w that vanishes at t = t_final. The scalar
// energy = 1/2 integral(v_t^2 + v_x^2) measures how far u is from being a
// weak solution, and gradient is the nodal representation of its first
// variation -(v_t + f'(u) v_x), realized by lumped-mass L2 projection so
// descent updates stay nodal.
struct DefectSolution {
    NodalField v;
    double energy = 0.0;
    NodalField gradient;
};

// Holds the assembled, final-time-constrained stiffness matrix and the
// lumped mass vector for one problem so that repeated defect solves (descent
// loops, sweeps) do not re-assemble. All methods are const and safe to call
// concurrently.
class DefectOperator {
public:
    explicit DefectOperator(ProblemData problem);

    const ProblemData& problem() const { return problem_; }
    const SpaceTimeMesh& mesh() const { return problem_.mesh; }
    const SparseSpdSystem& constrained_system() const { return system_; }
    const std::vector<double>& lumped_mass() const { return lumped_mass_; }

    std::vector<double> assemble_rhs(const NodalField& u) const;

    // Solves the constrained system for an arbitrary load vector. The load's
    // final-time entries are zeroed before the solve; pass warm_start to seed
    // conjugate gradients (the residual contract is unchanged).
    NodalField solve_constrained(std::vector<double> rhs, double rel_tol,
                                 const NodalField* warm_start = nullptr) const;

    DefectSolution compute(const NodalField& u, double rel_tol = kDefectRelTolDefault,
                           const NodalField* warm_start = nullptr) const;

    double directional_derivative(const NodalField& u, const NodalField& direction,
                                  double rel_tol = kDefectRelTolDefault) const;

private:
    ProblemData problem_;
    SparseSpdSystem system_;
    std::vector<double> lumped_mass_;
};

// Free-function forms; each assembles the operator afresh. Prefer
// DefectOperator when calling repeatedly on one problem.
std::vector<double> assemble_defect_rhs(const ProblemData& problem, const NodalField& u);

// Same load vector with the field and flux values prescribed directly at the
// quadrature points (layout of quad_values). The standard path passes
// (u, f(u)); the Young-measure path substitutes averaged moments, decoupling
// the flux value from the field value.
std::vector<double> assemble_defect_rhs_from_values(const ProblemData& problem,
                                                    const std::vector<double>& u_at_quad,
                                                    const std::vector<double>& f_at_quad);
DefectSolution compute_defect(const ProblemData& problem, const NodalField& u,
                              double rel_tol = kDefectRelTolDefault);
double directional_derivative(const ProblemData& problem, const NodalField& u,
                              const NodalField& direction);

// Derivative of the energy along `direction` when the defect v of u is
// already in hand: -integral(direction * (v_t + f'(u) v_x)). No solve.
double directional_derivative_given_defect(const ProblemData& problem,
                                           const NodalField& u, const NodalField& v,
                                           const NodalField& direction);

}  // namespace varcons
