#include "varcons/descent.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace varcons {

namespace {

// Load vector of the linearized defect problem:
// rhs_a = -integral(direction phi_a,t + f'(u) direction phi_a,x).
// Same structure as the defect load with (u, f(u)) replaced by the first
// variation (direction, f'(u) direction) and no data terms: data do not
// depend on u, so they drop out of the derivative.
std::vector<double> linearized_rhs(const ProblemData& problem, const NodalField& u,
                                   const NodalField& direction) {
    const SpaceTimeMesh& mesh = problem.mesh;
    std::vector<double> rhs(static_cast<size_t>(mesh.num_nodes()), 0.0);
    const double scale_t = 2.0 / mesh.dt();
    const double scale_x = 2.0 / mesh.dx();
    const double jac = mesh.dt() * mesh.dx() / 4.0;
    const std::vector<double> uq = quad_values(u);
    const std::vector<double> dq = quad_values(direction);
    const auto& qps = gauss_2x2();
    for (int ei = 0; ei < mesh.nt; ++ei) {
        for (int ej = 0; ej < mesh.nx; ++ej) {
            const auto nodes = mesh.element_nodes(ei, ej);
            const size_t base = (static_cast<size_t>(ei) * mesh.nx + ej) * 4;
            for (int q = 0; q < 4; ++q) {
                const double d = dq[base + q];
                const double fp = problem.flux.f_prime(uq[base + q]);
                const double w = qps[q].weight * jac;
                for (int k = 0; k < 4; ++k) {
                    rhs[nodes[k]] -= w * d * (scale_t * reference_shape_dxi(k, qps[q].xi, qps[q].eta) +
                                              fp * scale_x * reference_shape_deta(k, qps[q].xi, qps[q].eta));
                }
            }
        }
    }
    return rhs;
}

bool pinned_node(const SpaceTimeMesh& mesh, int i, int j) {
    return i == 0 || j == 0 || j == mesh.nx;
}

void impose_data(const ProblemData& problem, NodalField& u) {
    const SpaceTimeMesh& mesh = problem.mesh;
    for (int i = 0; i <= mesh.nt; ++i) {
        u(i, 0) = problem.u_left(mesh.node_t(i));
        u(i, mesh.nx) = problem.u_right(mesh.node_t(i));
    }
    for (int j = 0; j <= mesh.nx; ++j) u(0, j) = problem.u0(mesh.node_x(j));
}

void validate_config(const DescentConfig& config) {
    if (config.max_iters < 0) {
        throw std::invalid_argument("descend: max_iters must be nonnegative");
    }
    if (!(config.energy_tol > 0.0) || !(config.grad_tol > 0.0)) {
        throw std::invalid_argument("descend: tolerances must be positive");
    }
    if (!(config.backtracking.shrink > 0.0) || !(config.backtracking.shrink < 1.0)) {
        throw std::invalid_argument("descend: backtracking shrink must lie in (0,1)");
    }
    if (config.record_every < 1) {
        throw std::invalid_argument("descend: record_every must be at least 1");
    }
    if (config.max_stored_iterates < 1) {
        throw std::invalid_argument("descend: max_stored_iterates must be at least 1");
    }
    if (config.perturbation_epsilon < 0.0) {
        throw std::invalid_argument("descend: perturbation_epsilon must be nonnegative");
    }
}

}  // namespace

const char* to_string(DescentStatus status) {
    switch (status) {
        case DescentStatus::converged_energy: return "converged_energy";
        case DescentStatus::converged_gradient: return "converged_gradient";
        case DescentStatus::max_iters: return "max_iters";
        case DescentStatus::stalled: return "stalled";
    }
    return "unknown";
}

NodalField linearized_defect(const DefectOperator& op, const NodalField& u,
                             const NodalField& direction, double rel_tol,
                             const NodalField* warm_start) {
    require_same_mesh(u.mesh, op.mesh(), "linearized_defect");
    require_same_mesh(direction.mesh, op.mesh(), "linearized_defect");
    return op.solve_constrained(linearized_rhs(op.problem(), u, direction), rel_tol,
                                warm_start);
}

NodalField linearized_defect(const ProblemData& problem, const NodalField& u,
                             const NodalField& direction, double rel_tol) {
    return linearized_defect(DefectOperator(problem), u, direction, rel_tol);
}

double exact_step(const NodalField& v, const NodalField& V) {
    require_same_mesh(v.mesh, V.mesh, "exact_step");
    const double denom = integrate_h1_pairing(V, V);
    if (denom <= 1e-28) {
        throw std::domain_error("exact_step: linearized defect has vanishing seminorm; "
                                "the direction is stalled");
    }
    return -integrate_h1_pairing(v, V) / denom;
}

DescentResult descend(const ProblemData& problem, const NodalField& u_init,
                      const DescentConfig& config) {
    require_same_mesh(u_init.mesh, problem.mesh, "descend");
    validate_config(config);

    const DefectOperator op(problem);
    const std::vector<double>& mass = op.lumped_mass();
    const double eps = config.perturbation_epsilon;
    const bool perturbed = eps > 0.0;
    const SpaceTimeMesh& mesh = problem.mesh;

    DescentResult result;
    NodalField u = u_init;
    if (config.pin_data_boundary) impose_data(problem, u);

    // Objective and its nodal gradient. In plain mode these are E and the
    // projected -(v_t + f'(u) v_x); the perturbed mode adds the seminorm term
    // and its first variation eps^2 K u (lumped-projected to stay nodal).
    auto objective = [&](const NodalField& field, double defect_energy) {
        if (!perturbed) return defect_energy;
        return 0.5 * eps * eps * integrate_h1_pairing(field, field) + defect_energy;
    };
    auto effective_gradient = [&](const NodalField& field, const DefectSolution& sol) {
        NodalField g = sol.gradient;
        if (perturbed) {
            const std::vector<double> ku = stiffness_apply(field);
            for (size_t a = 0; a < g.values.size(); ++a) {
                g.values[a] += eps * eps * ku[a] / mass[a];
            }
        }
        if (config.pin_data_boundary) {
            for (int i = 0; i <= mesh.nt; ++i) {
                for (int j = 0; j <= mesh.nx; ++j) {
                    if (pinned_node(mesh, i, j)) g(i, j) = 0.0;
                }
            }
        }
        return g;
    };
    auto gradient_norm = [&](const NodalField& g) {
        double sum = 0.0;
        for (size_t a = 0; a < g.values.size(); ++a) {
            sum += mass[a] * g.values[a] * g.values[a];
        }
        return std::sqrt(sum);
    };
    auto store_iterate = [&](const NodalField& field) {
        if (static_cast<int>(result.iterates.size()) >= config.max_stored_iterates) {
            result.iterates.erase(result.iterates.begin());
        }
        result.iterates.push_back(field);
    };

    DefectSolution sol = op.compute(u, config.solve_rel_tol);
    NodalField grad = effective_gradient(u, sol);
    double obj = objective(u, sol.energy);
    double gnorm = gradient_norm(grad);
    result.history.records.push_back({0, obj, gnorm, 0.0, 0});
    store_iterate(u);

    bool finished = false;
    NodalField V_prev;  // warm start for the linearized solves
    for (int j = 1; j <= config.max_iters; ++j) {
        if (gnorm <= config.grad_tol) {
            result.history.status = DescentStatus::converged_gradient;
            finished = true;
            break;
        }
        if (obj <= config.energy_tol) {
            result.history.status = DescentStatus::converged_energy;
            finished = true;
            break;
        }

        NodalField direction = grad;
        for (double& value : direction.values) value = -value;

        const NodalField* warm_v = V_prev.values.empty() ? nullptr : &V_prev;
        NodalField V = linearized_defect(op, u, direction, config.solve_rel_tol, warm_v);

        double step;
        try {
            if (!perturbed) {
                step = exact_step(sol.v, V);
            } else {
                // Stationarity of the quadratic model of E_eps along the ray.
                const double denom = eps * eps * integrate_h1_pairing(direction, direction) +
                                     integrate_h1_pairing(V, V);
                if (denom <= 1e-28) {
                    throw std::domain_error("descend: perturbed step denominator vanished");
                }
                step = -(eps * eps * integrate_h1_pairing(u, direction) +
                         integrate_h1_pairing(sol.v, V)) /
                       denom;
            }
        } catch (const std::domain_error&) {
            result.history.status = DescentStatus::stalled;
            finished = true;
            break;
        }
        V_prev = V;

        NodalField u_try(mesh);
        DefectSolution sol_try;
        double obj_try = 0.0;
        bool accepted = false;
        int halvings = 0;
        const int attempts = config.backtracking.enabled ? config.backtracking.max_halvings + 1 : 1;
        for (int attempt = 0; attempt < attempts; ++attempt) {
            for (size_t a = 0; a < u.values.size(); ++a) {
                u_try.values[a] = u.values[a] + step * direction.values[a];
            }
            sol_try = op.compute(u_try, config.solve_rel_tol, &sol.v);
            obj_try = objective(u_try, sol_try.energy);
            if (!config.backtracking.enabled || obj_try < obj) {
                accepted = true;
                break;
            }
            step *= config.backtracking.shrink;
            ++halvings;
        }
        if (!accepted) {
            result.history.status = DescentStatus::stalled;
            finished = true;
            break;
        }

        u = std::move(u_try);
        sol = std::move(sol_try);
        obj = obj_try;
        grad = effective_gradient(u, sol);
        gnorm = gradient_norm(grad);
        result.history.records.push_back({j, obj, gnorm, step, halvings});
        if (j % config.record_every == 0) store_iterate(u);
    }

    if (!finished) {
        if (gnorm <= config.grad_tol) {
            result.history.status = DescentStatus::converged_gradient;
        } else if (obj <= config.energy_tol) {
            result.history.status = DescentStatus::converged_energy;
        } else {
            result.history.status = DescentStatus::max_iters;
        }
    }
    result.field = std::move(u);
    return result;
}

}  // namespace varcons
