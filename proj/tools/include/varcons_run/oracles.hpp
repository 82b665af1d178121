#pragma once

#include <cstdint>
#include <vector>

#include "varcons/defect.hpp"
#include "varcons/mesh.hpp"

namespace varcons::cli {

// Reference implementations kept deliberately separate from the core
// assembly and solver paths: closed-form element matrices instead of
// quadrature, dense direct factorizations instead of iterative solves.
// They are slow and only meant for cross-checking on small meshes.

// Dense space-time stiffness matrix from the closed-form tensor-product
// element integrals (no numerical quadrature involved). Row-major n x n.
std::vector<double> dense_stiffness(const SpaceTimeMesh& mesh);

// Applies the final-time constraint to a dense matrix and load vector the
// same way the sparse path defines it: zero rows and columns, unit diagonal,
// zero load at constrained nodes.
void dense_apply_final_time_constraint(const SpaceTimeMesh& mesh,
                                       std::vector<double>& matrix,
                                       std::vector<double>& rhs);

// Solves a dense linear system by Gaussian elimination with partial
// pivoting. Throws std::runtime_error on a vanishing pivot.
std::vector<double> dense_solve(std::vector<double> matrix,
                                std::vector<double> rhs);

// Attempts an unpivoted Cholesky factorization; true iff every pivot is
// positive, i.e. the matrix is symmetric positive definite to working
// precision.
bool dense_is_spd(std::vector<double> matrix, int n);

// Defect load vector evaluated with 4x4 Gauss quadrature and independently
// coded bilinear shapes, for checking the 2x2 production assembly.
std::vector<double> dense_defect_rhs(const ProblemData& problem,
                                     const NodalField& u);

// Deterministic pseudo-random nodal field with values in [-1, 1]. Uses
// mt19937_64 raw draws mapped by an explicit bit transform, because the
// standard distributions are not bit-reproducible across library
// implementations.
NodalField random_field(const SpaceTimeMesh& mesh, std::uint64_t seed);

// Largest relative mismatch between the core defect solve and the dense
// reference on the given problem and iterate, measured in the H1 seminorm
// of the difference over the H1 seminorm of the reference.
double defect_vs_dense_error(const ProblemData& problem, const NodalField& u,
                             double rel_tol);

}  // namespace varcons::cli
