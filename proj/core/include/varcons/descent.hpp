#pragma once

#include <vector>

#include "varcons/defect.hpp"
#include "varcons/fem.hpp"
#include "varcons/mesh.hpp"

namespace varcons {

struct BacktrackingConfig {
    bool enabled = true;
    double shrink = 0.5;
    int max_halvings = 30;
};

// Knobs for the steepest-descent loop. The defaults match the desk-scale
// experiments; tolerances must be positive.
//
// perturbation_epsilon > 0 switches the objective from E(u) to the singular
// perturbation E_eps(u) = (eps^2/2) |u|_H1^2 + E(u). This mode exists to
// cross-check the viscous Newton solver against direct minimization; when
// pin_data_boundary is also set the iterates keep the initial and lateral
// data fixed (matching the Dirichlet set of the viscous solve) and descent
// directions vanish there.
struct DescentConfig {
    int max_iters = 200;
    double energy_tol = 1e-12;
    double grad_tol = 1e-10;
    BacktrackingConfig backtracking;
    int record_every = 10;
    int max_stored_iterates = 200;
    double solve_rel_tol = kDefectRelTolDefault;
    double perturbation_epsilon = 0.0;
    bool pin_data_boundary = false;
};

enum class DescentStatus { converged_energy, converged_gradient, max_iters, stalled };

const char* to_string(DescentStatus status);

// One row per iteration: index 0 is the initial state, each later row is the
// state after that update. In perturbed mode `energy` is the perturbed
// functional, since that is the quantity the loop monitors and decreases.
struct DescentRecord {
    int index = 0;
    double energy = 0.0;
    double gradient_norm = 0.0;
    double step_size = 0.0;
    int halvings = 0;
};

struct DescentHistory {
    std::vector<DescentRecord> records;
    DescentStatus status = DescentStatus::max_iters;
};

struct DescentResult {
    NodalField field;
    DescentHistory history;
    // Snapshots taken every record_every iterations (index 0 included),
    // keeping at most max_stored_iterates of the most recent ones.
    std::vector<NodalField> iterates;
};

// Linearized defect V of a direction field: V vanishes at t = t_final and
// solves the same constrained system as the defect, with load
// -integral(direction phi_a,t + f'(u) direction phi_a,x) and homogeneous
// data. This is the derivative of u -> v(u) in the given direction.
NodalField linearized_defect(const ProblemData& problem, const NodalField& u,
                             const NodalField& direction,
                             double rel_tol = kDefectRelTolDefault);
NodalField linearized_defect(const DefectOperator& op, const NodalField& u,
                             const NodalField& direction,
                             double rel_tol = kDefectRelTolDefault,
                             const NodalField* warm_start = nullptr);

// Step size minimizing the quadratic model of E along the ray u + s U:
// s = -pairing(v, V) / pairing(V, V). Throws std::domain_error when the
// denominator is below 1e-28, which signals a stalled direction (V = 0).
double exact_step(const NodalField& v, const NodalField& V);

DescentResult descend(const ProblemData& problem, const NodalField& u_init,
                      const DescentConfig& config);

}  // namespace varcons
