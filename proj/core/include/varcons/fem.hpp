#pragma once

#include <functional>
#include <vector>

#include "varcons/mesh.hpp"

namespace varcons {

// Compressed sparse row matrix, square, fixed sparsity once built.
struct SparseMatrix {
    int n = 0;
    std::vector<int> row_ptr;
    std::vector<int> col;
    std::vector<double> val;

    // y = A x
    void multiply(const double* x, double* y) const;
    std::vector<double> multiply(const std::vector<double>& x) const;
};

// Space-time H1 stiffness system: matrix entries are
// integral(phi_a,t phi_b,t + phi_a,x phi_b,x) over the slab. The final-time
// constraint (test and trial functions vanish at t = t_final) turns this
// into a symmetric positive definite system; until then the matrix alone is
// only semidefinite.
struct SparseSpdSystem {
    SpaceTimeMesh mesh;
    SparseMatrix matrix;
    std::vector<double> rhs;
    bool final_time_constrained = false;
};

SparseSpdSystem assemble_stiffness(const SpaceTimeMesh& mesh);

// Imposes the homogeneous condition at the t = t_final nodes by zeroing the
// constrained rows and columns, placing a unit diagonal, and zeroing the
// corresponding rhs entries. Idempotent: applying it twice is a no-op.
SparseSpdSystem apply_final_time_constraint(SparseSpdSystem system);

bool is_final_time_node(const SpaceTimeMesh& mesh, int node);

// Unpreconditioned conjugate gradients on the constrained system, converging
// when ||b - A x||_2 <= rel_tol * ||b||_2. A zero rhs returns the zero field
// without iterating. Constrained nodes stay exactly zero throughout.
struct CgOptions {
    double rel_tol = 1e-10;
    int max_iters = 0;               // 0 means 10 * (number of free nodes)
    bool jacobi_preconditioner = false;
    const NodalField* warm_start = nullptr;  // optional initial guess
};

NodalField solve_spd(const SparseSpdSystem& system, const CgOptions& options);
NodalField solve_spd(const SparseSpdSystem& system, double rel_tol = 1e-10);

// Row-sum (lumped) mass vector, m_a = integral(phi_a). Strictly positive.
std::vector<double> lumped_mass_vector(const SpaceTimeMesh& mesh);

// Derivatives of a nodal field at the four Gauss points of every element,
// laid out as index (element_index * 4 + q) with element_index = ei*nx + ej
// and q running over gauss_2x2() order.
struct QuadDerivatives {
    SpaceTimeMesh mesh;
    std::vector<double> d_t;
    std::vector<double> d_x;
};

QuadDerivatives field_derivatives(const NodalField& field);

// Field values at the same Gauss points, same layout as QuadDerivatives.
std::vector<double> quad_values(const NodalField& field);

// Exact H1 seminorm pairing integral(a_t b_t + a_x b_x), evaluated with the
// same quadrature as the stiffness assembly so that the pairing equals
// a^T K b to rounding.
double integrate_h1_pairing(const NodalField& a, const NodalField& b);

// Action of the unconstrained stiffness on a field, entry a equal to
// integral(u_t phi_a,t + u_x phi_a,x), assembled element by element.
std::vector<double> stiffness_apply(const NodalField& field);

// Lumped L2 pairing sum_a m_a a_a b_a and the induced norm.
double lumped_l2_pairing(const NodalField& a, const NodalField& b);
double lumped_l2_norm(const NodalField& a);

// Full H1 norm with the lumped mass standing in for the L2 part:
// sqrt(|a|_K^2 + ||a||_ml^2).
double h1_norm(const NodalField& a);

// Nodal interpolant of g(t, x). Rejects non-finite samples.
NodalField interpolate_function(const SpaceTimeMesh& mesh,
                                const std::function<double(double, double)>& g);

}  // namespace varcons
