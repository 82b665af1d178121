#include "varcons/defect.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace varcons {

namespace {

void check_data_finite(const ProblemData& problem) {
    const SpaceTimeMesh& mesh = problem.mesh;
    for (int j = 0; j <= mesh.nx; ++j) {
        if (!std::isfinite(problem.u0(mesh.node_x(j)))) {
            throw std::invalid_argument("ProblemData: u0 is not finite at x=" +
                                        std::to_string(mesh.node_x(j)));
        }
    }
    for (int i = 0; i <= mesh.nt; ++i) {
        const double t = mesh.node_t(i);
        if (!std::isfinite(problem.u_left(t)) || !std::isfinite(problem.u_right(t))) {
            throw std::invalid_argument("ProblemData: boundary value is not finite at t=" +
                                        std::to_string(t));
        }
    }
}

// Shape values and reference derivatives at the interior Gauss points,
// duplicated from the assembly tables on purpose: the load vector must use
// the same rule as the stiffness for the compatibility identities to cancel
// exactly.
struct QuadShapes {
    double n[4][4];
    double dxi[4][4];
    double deta[4][4];
};

const QuadShapes& quad_shapes() {
    static const QuadShapes table = [] {
        QuadShapes t{};
        const auto& qps = gauss_2x2();
        for (int q = 0; q < 4; ++q) {
            for (int k = 0; k < 4; ++k) {
                t.n[q][k] = reference_shape(k, qps[q].xi, qps[q].eta);
                t.dxi[q][k] = reference_shape_dxi(k, qps[q].xi, qps[q].eta);
                t.deta[q][k] = reference_shape_deta(k, qps[q].xi, qps[q].eta);
            }
        }
        return t;
    }();
    return table;
}

}  // namespace

DefectOperator::DefectOperator(ProblemData problem) : problem_(std::move(problem)) {
    check_data_finite(problem_);
    system_ = apply_final_time_constraint(assemble_stiffness(problem_.mesh));
    lumped_mass_ = lumped_mass_vector(problem_.mesh);
}

std::vector<double> DefectOperator::assemble_rhs(const NodalField& u) const {
    return assemble_defect_rhs(problem_, u);
}

std::vector<double> assemble_defect_rhs(const ProblemData& problem, const NodalField& u) {
    require_same_mesh(u.mesh, problem.mesh, "assemble_defect_rhs");
    const std::vector<double> uq = quad_values(u);
    std::vector<double> fq(uq.size());
    for (size_t p = 0; p < uq.size(); ++p) fq[p] = problem.flux.f(uq[p]);
    return assemble_defect_rhs_from_values(problem, uq, fq);
}

std::vector<double> assemble_defect_rhs_from_values(const ProblemData& problem,
                                                    const std::vector<double>& u_at_quad,
                                                    const std::vector<double>& f_at_quad) {
    const SpaceTimeMesh& mesh = problem.mesh;
    const size_t expected = static_cast<size_t>(mesh.num_elements()) * 4;
    if (u_at_quad.size() != expected || f_at_quad.size() != expected) {
        throw std::invalid_argument(
            "assemble_defect_rhs_from_values: quadrature arrays have wrong length");
    }
    std::vector<double> rhs(static_cast<size_t>(mesh.num_nodes()), 0.0);
    const QuadShapes& st = quad_shapes();
    const double dt = mesh.dt();
    const double dx = mesh.dx();
    const double scale_t = 2.0 / dt;
    const double scale_x = 2.0 / dx;
    const double jac = dt * dx / 4.0;

    // Domain terms: rhs_a -= integral(u phi_a,t + f phi_a,x).
    for (int ei = 0; ei < mesh.nt; ++ei) {
        for (int ej = 0; ej < mesh.nx; ++ej) {
            const auto nodes = mesh.element_nodes(ei, ej);
            const size_t base = (static_cast<size_t>(ei) * mesh.nx + ej) * 4;
            for (int q = 0; q < 4; ++q) {
                const double uq = u_at_quad[base + q];
                const double fq = f_at_quad[base + q];
                const double w = gauss_2x2()[q].weight * jac;
                for (int k = 0; k < 4; ++k) {
                    rhs[nodes[k]] -= w * (uq * scale_t * st.dxi[q][k] +
                                          fq * scale_x * st.deta[q][k]);
                }
            }
        }
    }

    // Initial-datum term along t = 0: rhs_a -= integral(u0 phi_a) dx. Only
    // the two bottom corners of each first-row element see the edge.
    for (int ej = 0; ej < mesh.nx; ++ej) {
        const int left = mesh.node_index(0, ej);
        const int right = mesh.node_index(0, ej + 1);
        const double x_mid = 0.5 * (mesh.node_x(ej) + mesh.node_x(ej + 1));
        for (const auto& [eta, w] : gauss_edge()) {
            const double x = x_mid + 0.5 * dx * eta;
            const double value = problem.u0(x);
            const double common = w * (dx / 2.0) * value;
            rhs[left] -= common * 0.5 * (1.0 - eta);
            rhs[right] -= common * 0.5 * (1.0 + eta);
        }
    }

    // Lateral flux terms: +integral(f(u_right) phi_a) dt at x = x_max and
    // -integral(f(u_left) phi_a) dt at x = x_min. These are the boundary
    // terms the divergence theorem produces, with outward-normal signs.
    for (int ei = 0; ei < mesh.nt; ++ei) {
        const double t_mid = 0.5 * (mesh.node_t(ei) + mesh.node_t(ei + 1));
        const int lo_left = mesh.node_index(ei, 0);
        const int hi_left = mesh.node_index(ei + 1, 0);
        const int lo_right = mesh.node_index(ei, mesh.nx);
        const int hi_right = mesh.node_index(ei + 1, mesh.nx);
        for (const auto& [xi, w] : gauss_edge()) {
            const double t = t_mid + 0.5 * dt * xi;
            const double common = w * (dt / 2.0);
            const double f_left = problem.flux.f(problem.u_left(t));
            const double f_right = problem.flux.f(problem.u_right(t));
            rhs[lo_right] += common * f_right * 0.5 * (1.0 - xi);
            rhs[hi_right] += common * f_right * 0.5 * (1.0 + xi);
            rhs[lo_left] -= common * f_left * 0.5 * (1.0 - xi);
            rhs[hi_left] -= common * f_left * 0.5 * (1.0 + xi);
        }
    }
    return rhs;
}

NodalField DefectOperator::solve_constrained(std::vector<double> rhs, double rel_tol,
                                             const NodalField* warm_start) const {
    const int n = mesh().num_nodes();
    if (static_cast<int>(rhs.size()) != n) {
        throw std::invalid_argument("solve_constrained: load vector has wrong length");
    }
    SparseSpdSystem local = system_;  // shares nothing mutable; copy is cheap vs solve
    local.rhs = std::move(rhs);
    for (int a = mesh().nt * (mesh().nx + 1); a < n; ++a) local.rhs[a] = 0.0;
    CgOptions options;
    options.rel_tol = rel_tol;
    options.warm_start = warm_start;
    return solve_spd(local, options);
}

DefectSolution DefectOperator::compute(const NodalField& u, double rel_tol,
                                       const NodalField* warm_start) const {
    require_same_mesh(u.mesh, mesh(), "compute_defect");
    DefectSolution solution;
    solution.v = solve_constrained(assemble_rhs(u), rel_tol, warm_start);
    solution.energy = 0.5 * integrate_h1_pairing(solution.v, solution.v);

    // Nodal gradient by lumped-mass projection: solve diag(m) g = b with
    // b_a = -integral(phi_a (v_t + f'(u) v_x)). The projection makes the
    // lumped pairing of g with any direction reproduce the directional
    // derivative exactly.
    const SpaceTimeMesh& msh = mesh();
    const QuadShapes& st = quad_shapes();
    const double jac = msh.dt() * msh.dx() / 4.0;
    const QuadDerivatives dv = field_derivatives(solution.v);
    const std::vector<double> uq = quad_values(u);
    std::vector<double> b(static_cast<size_t>(msh.num_nodes()), 0.0);
    for (int ei = 0; ei < msh.nt; ++ei) {
        for (int ej = 0; ej < msh.nx; ++ej) {
            const auto nodes = msh.element_nodes(ei, ej);
            const size_t base = (static_cast<size_t>(ei) * msh.nx + ej) * 4;
            for (int q = 0; q < 4; ++q) {
                const double density = dv.d_t[base + q] +
                                       problem_.flux.f_prime(uq[base + q]) * dv.d_x[base + q];
                const double w = gauss_2x2()[q].weight * jac;
                for (int k = 0; k < 4; ++k) {
                    b[nodes[k]] -= w * st.n[q][k] * density;
                }
            }
        }
    }
    solution.gradient = NodalField(msh);
    for (size_t a = 0; a < b.size(); ++a) {
        solution.gradient.values[a] = b[a] / lumped_mass_[a];
    }
    return solution;
}

double DefectOperator::directional_derivative(const NodalField& u,
                                              const NodalField& direction,
                                              double rel_tol) const {
    require_same_mesh(u.mesh, mesh(), "directional_derivative");
    require_same_mesh(direction.mesh, mesh(), "directional_derivative");
    const NodalField v = solve_constrained(assemble_rhs(u), rel_tol);
    return directional_derivative_given_defect(problem_, u, v, direction);
}

double directional_derivative_given_defect(const ProblemData& problem,
                                           const NodalField& u, const NodalField& v,
                                           const NodalField& direction) {
    require_same_mesh(u.mesh, problem.mesh, "directional_derivative");
    require_same_mesh(v.mesh, problem.mesh, "directional_derivative");
    require_same_mesh(direction.mesh, problem.mesh, "directional_derivative");
    const SpaceTimeMesh& mesh = problem.mesh;
    const double jac = mesh.dt() * mesh.dx() / 4.0;
    const QuadDerivatives dv = field_derivatives(v);
    const std::vector<double> uq = quad_values(u);
    const std::vector<double> dirq = quad_values(direction);
    double total = 0.0;
    for (size_t p = 0; p < uq.size(); ++p) {
        const double density = dv.d_t[p] + problem.flux.f_prime(uq[p]) * dv.d_x[p];
        total -= gauss_2x2()[p % 4].weight * jac * dirq[p] * density;
    }
    return total;
}

DefectSolution compute_defect(const ProblemData& problem, const NodalField& u,
                              double rel_tol) {
    return DefectOperator(problem).compute(u, rel_tol);
}

double directional_derivative(const ProblemData& problem, const NodalField& u,
                              const NodalField& direction) {
    return DefectOperator(problem).directional_derivative(u, direction);
}

}  // namespace varcons
