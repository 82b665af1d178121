#include "varcons_run/oracles.hpp"

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

#include "varcons/fem.hpp"

namespace varcons::cli {

namespace {

// Exact 1-D element integrals for linear hats on an interval of length h:
// S = int phi_a' phi_b' dx scaled by 1/h, M = int phi_a phi_b dx scaled by h.
constexpr double kS[2][2] = {{1.0, -1.0}, {-1.0, 1.0}};
constexpr double kM[2][2] = {{1.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 1.0 / 3.0}};

}  // namespace

std::vector<double> dense_stiffness(const SpaceTimeMesh& mesh) {
    const int n = mesh.num_nodes();
    std::vector<double> matrix(static_cast<size_t>(n) * n, 0.0);
    const double dt = mesh.dt();
    const double dx = mesh.dx();
    // Local node k on an element factors as (t-vertex k/2, x-vertex k%2),
    // matching the element_nodes ordering. The Q1 element integral is the
    // tensor product of the 1-D mass and stiffness integrals.
    for (int ei = 0; ei < mesh.nt; ++ei) {
        for (int ej = 0; ej < mesh.nx; ++ej) {
            const auto nodes = mesh.element_nodes(ei, ej);
            for (int a = 0; a < 4; ++a) {
                for (int b = 0; b < 4; ++b) {
                    const int at = a / 2, ax = a % 2;
                    const int bt = b / 2, bx = b % 2;
                    const double val = (dx / dt) * kS[at][bt] * kM[ax][bx] +
                                       (dt / dx) * kM[at][bt] * kS[ax][bx];
                    matrix[static_cast<size_t>(nodes[a]) * n + nodes[b]] += val;
                }
            }
        }
    }
    return matrix;
}

void dense_apply_final_time_constraint(const SpaceTimeMesh& mesh,
                                       std::vector<double>& matrix,
                                       std::vector<double>& rhs) {
    const int n = mesh.num_nodes();
    if (matrix.size() != static_cast<size_t>(n) * n || rhs.size() != static_cast<size_t>(n)) {
        throw std::invalid_argument("dense constraint: size mismatch");
    }
    for (int j = 0; j <= mesh.nx; ++j) {
        const int a = mesh.node_index(mesh.nt, j);
        for (int b = 0; b < n; ++b) {
            matrix[static_cast<size_t>(a) * n + b] = 0.0;
            matrix[static_cast<size_t>(b) * n + a] = 0.0;
        }
        matrix[static_cast<size_t>(a) * n + a] = 1.0;
        rhs[static_cast<size_t>(a)] = 0.0;
    }
}

std::vector<double> dense_solve(std::vector<double> matrix, std::vector<double> rhs) {
    const size_t n = rhs.size();
    if (matrix.size() != n * n) throw std::invalid_argument("dense solve: size mismatch");
    std::vector<size_t> perm(n);
    for (size_t i = 0; i < n; ++i) perm[i] = i;
    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        double best = std::abs(matrix[perm[col] * n + col]);
        for (size_t r = col + 1; r < n; ++r) {
            const double cand = std::abs(matrix[perm[r] * n + col]);
            if (cand > best) {
                best = cand;
                pivot = r;
            }
        }
        if (best == 0.0) throw std::runtime_error("dense solve: singular matrix");
        std::swap(perm[col], perm[pivot]);
        const size_t p = perm[col];
        const double diag = matrix[p * n + col];
        for (size_t r = col + 1; r < n; ++r) {
            const size_t q = perm[r];
            const double factor = matrix[q * n + col] / diag;
            if (factor == 0.0) continue;
            matrix[q * n + col] = 0.0;
            for (size_t c = col + 1; c < n; ++c) {
                matrix[q * n + c] -= factor * matrix[p * n + c];
            }
            rhs[q] -= factor * rhs[p];
        }
    }
    std::vector<double> x(n, 0.0);
    for (size_t rr = n; rr-- > 0;) {
        const size_t p = perm[rr];
        double acc = rhs[p];
        for (size_t c = rr + 1; c < n; ++c) acc -= matrix[p * n + c] * x[c];
        x[rr] = acc / matrix[p * n + rr];
    }
    return x;
}

bool dense_is_spd(std::vector<double> matrix, int n) {
    if (matrix.size() != static_cast<size_t>(n) * n) {
        throw std::invalid_argument("spd check: size mismatch");
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) {
            const double diff = matrix[static_cast<size_t>(i) * n + j] -
                                matrix[static_cast<size_t>(j) * n + i];
            if (std::abs(diff) > 1e-12) return false;
        }
    }
    // In-place Cholesky; a nonpositive pivot means not positive definite.
    for (int k = 0; k < n; ++k) {
        double pivot = matrix[static_cast<size_t>(k) * n + k];
        for (int j = 0; j < k; ++j) {
            const double l = matrix[static_cast<size_t>(k) * n + j];
            pivot -= l * l;
        }
        if (!(pivot > 0.0)) return false;
        const double root = std::sqrt(pivot);
        matrix[static_cast<size_t>(k) * n + k] = root;
        for (int i = k + 1; i < n; ++i) {
            double acc = matrix[static_cast<size_t>(i) * n + k];
            for (int j = 0; j < k; ++j) {
                acc -= matrix[static_cast<size_t>(i) * n + j] *
                       matrix[static_cast<size_t>(k) * n + j];
            }
            matrix[static_cast<size_t>(i) * n + k] = acc / root;
        }
    }
    return true;
}

std::vector<double> dense_defect_rhs(const ProblemData& problem, const NodalField& u) {
    const SpaceTimeMesh& mesh = problem.mesh;
    require_same_mesh(u.mesh, mesh, "dense_defect_rhs");
    const int n = mesh.num_nodes();
    std::vector<double> rhs(static_cast<size_t>(n), 0.0);

    // 4-point Gauss-Legendre rule on [-1, 1], deliberately richer than the
    // production rule so agreement is not an artifact of sharing one rule.
    const std::array<double, 4> gp = {-0.8611363115940526, -0.3399810435848563,
                                      0.3399810435848563, 0.8611363115940526};
    const std::array<double, 4> gw = {0.3478548451374538, 0.6521451548625461,
                                      0.6521451548625461, 0.3478548451374538};

    auto shape = [](int k, double xi, double eta) {
        const double sx = (k / 2 == 0) ? -1.0 : 1.0;
        const double se = (k % 2 == 0) ? -1.0 : 1.0;
        return 0.25 * (1.0 + sx * xi) * (1.0 + se * eta);
    };
    auto shape_dxi = [](int k, double eta) {
        const double sx = (k / 2 == 0) ? -1.0 : 1.0;
        const double se = (k % 2 == 0) ? -1.0 : 1.0;
        return 0.25 * sx * (1.0 + se * eta);
    };
    auto shape_deta = [](int k, double xi) {
        const double sx = (k / 2 == 0) ? -1.0 : 1.0;
        const double se = (k % 2 == 0) ? -1.0 : 1.0;
        return 0.25 * se * (1.0 + sx * xi);
    };

    const double dt = mesh.dt();
    const double dx = mesh.dx();
    const double jac = 0.25 * dt * dx;
    const double scale_t = 2.0 / dt;
    const double scale_x = 2.0 / dx;

    for (int ei = 0; ei < mesh.nt; ++ei) {
        for (int ej = 0; ej < mesh.nx; ++ej) {
            const auto nodes = mesh.element_nodes(ei, ej);
            for (int qi = 0; qi < 4; ++qi) {
                for (int qj = 0; qj < 4; ++qj) {
                    const double xi = gp[static_cast<size_t>(qi)];
                    const double eta = gp[static_cast<size_t>(qj)];
                    const double w =
                        gw[static_cast<size_t>(qi)] * gw[static_cast<size_t>(qj)] * jac;
                    double uq = 0.0;
                    for (int k = 0; k < 4; ++k) {
                        uq += u.values[static_cast<size_t>(nodes[k])] * shape(k, xi, eta);
                    }
                    const double fq = problem.flux.f(uq);
                    for (int a = 0; a < 4; ++a) {
                        rhs[static_cast<size_t>(nodes[a])] -=
                            w * (uq * scale_t * shape_dxi(a, eta) +
                                 fq * scale_x * shape_deta(a, xi));
                    }
                }
            }
        }
    }

    // t = 0 edge: -int u0 phi_a dx along the bottom of the first element row.
    for (int ej = 0; ej < mesh.nx; ++ej) {
        const int left = mesh.node_index(0, ej);
        const int right = mesh.node_index(0, ej + 1);
        const double x0 = mesh.node_x(ej);
        for (int q = 0; q < 4; ++q) {
            const double eta = gp[static_cast<size_t>(q)];
            const double w = gw[static_cast<size_t>(q)] * 0.5 * dx;
            const double x = x0 + 0.5 * (eta + 1.0) * dx;
            const double u0x = problem.u0(x);
            rhs[static_cast<size_t>(left)] -= w * u0x * 0.5 * (1.0 - eta);
            rhs[static_cast<size_t>(right)] -= w * u0x * 0.5 * (1.0 + eta);
        }
    }

    // Lateral edges: +f(u_right) phi_a at x_max, -f(u_left) phi_a at x_min.
    for (int ei = 0; ei < mesh.nt; ++ei) {
        const double t0 = mesh.node_t(ei);
        const int left_lo = mesh.node_index(ei, 0);
        const int left_hi = mesh.node_index(ei + 1, 0);
        const int right_lo = mesh.node_index(ei, mesh.nx);
        const int right_hi = mesh.node_index(ei + 1, mesh.nx);
        for (int q = 0; q < 4; ++q) {
            const double xi = gp[static_cast<size_t>(q)];
            const double w = gw[static_cast<size_t>(q)] * 0.5 * dt;
            const double t = t0 + 0.5 * (xi + 1.0) * dt;
            const double fl = problem.flux.f(problem.u_left(t));
            const double fr = problem.flux.f(problem.u_right(t));
            rhs[static_cast<size_t>(left_lo)] -= w * fl * 0.5 * (1.0 - xi);
            rhs[static_cast<size_t>(left_hi)] -= w * fl * 0.5 * (1.0 + xi);
            rhs[static_cast<size_t>(right_lo)] += w * fr * 0.5 * (1.0 - xi);
            rhs[static_cast<size_t>(right_hi)] += w * fr * 0.5 * (1.0 + xi);
        }
    }
    return rhs;
}

NodalField random_field(const SpaceTimeMesh& mesh, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    NodalField field(mesh);
    for (double& value : field.values) {
        // Top 53 bits to a double in [0, 1), then an affine map to [-1, 1).
        // mt19937_64 output is pinned by the standard; this transform keeps
        // the values identical across standard library implementations.
        const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        value = 2.0 * unit - 1.0;
    }
    return field;
}

double defect_vs_dense_error(const ProblemData& problem, const NodalField& u,
                             double rel_tol) {
    const SpaceTimeMesh& mesh = problem.mesh;
    DefectOperator op(problem);
    const DefectSolution sol = op.compute(u, rel_tol);

    std::vector<double> matrix = dense_stiffness(mesh);
    std::vector<double> rhs = dense_defect_rhs(problem, u);
    dense_apply_final_time_constraint(mesh, matrix, rhs);
    const std::vector<double> v_dense = dense_solve(std::move(matrix), std::move(rhs));

    NodalField diff(mesh);
    NodalField reference(mesh);
    reference.values = v_dense;
    for (size_t a = 0; a < diff.values.size(); ++a) {
        diff.values[a] = sol.v.values[a] - v_dense[a];
    }
    const double num = std::sqrt(integrate_h1_pairing(diff, diff));
    const double den = std::sqrt(integrate_h1_pairing(reference, reference));
    if (den == 0.0) return num;
    return num / den;
}

}  // namespace varcons::cli
