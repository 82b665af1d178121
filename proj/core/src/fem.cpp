#include "varcons/fem.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "varcons/errors.hpp"

namespace varcons {

namespace {

// Shape values and reference derivatives tabulated at the 2x2 Gauss points.
struct ShapeTable {
    double n[4][4];
    double dxi[4][4];
    double deta[4][4];
};

const ShapeTable& shape_table() {
    static const ShapeTable table = [] {
        ShapeTable t{};
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

int find_entry(const SparseMatrix& m, int row, int column) {
    for (int p = m.row_ptr[row]; p < m.row_ptr[row + 1]; ++p) {
        if (m.col[p] == column) return p;
    }
    throw std::logic_error("sparse entry missing from stencil pattern");
}

}  // namespace

void SparseMatrix::multiply(const double* x, double* y) const {
    for (int i = 0; i < n; ++i) {
        double sum = 0.0;
        for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
            sum += val[p] * x[col[p]];
        }
        y[i] = sum;
    }
}

std::vector<double> SparseMatrix::multiply(const std::vector<double>& x) const {
    std::vector<double> y(static_cast<size_t>(n));
    multiply(x.data(), y.data());
    return y;
}

SparseSpdSystem assemble_stiffness(const SpaceTimeMesh& mesh) {
    const int n = mesh.num_nodes();
    SparseSpdSystem system;
    system.mesh = mesh;
    system.rhs.assign(static_cast<size_t>(n), 0.0);

    // Nine-point stencil sparsity of the tensor Q1 mesh, rows in node order,
    // columns sorted ascending within each row.
    SparseMatrix& m = system.matrix;
    m.n = n;
    m.row_ptr.assign(static_cast<size_t>(n) + 1, 0);
    for (int i = 0; i <= mesh.nt; ++i) {
        for (int j = 0; j <= mesh.nx; ++j) {
            int count = 0;
            for (int di = -1; di <= 1; ++di) {
                if (i + di < 0 || i + di > mesh.nt) continue;
                for (int dj = -1; dj <= 1; ++dj) {
                    if (j + dj < 0 || j + dj > mesh.nx) continue;
                    ++count;
                }
            }
            m.row_ptr[mesh.node_index(i, j) + 1] = count;
        }
    }
    for (int a = 0; a < n; ++a) m.row_ptr[a + 1] += m.row_ptr[a];
    m.col.resize(static_cast<size_t>(m.row_ptr[n]));
    m.val.assign(static_cast<size_t>(m.row_ptr[n]), 0.0);
    for (int i = 0; i <= mesh.nt; ++i) {
        for (int j = 0; j <= mesh.nx; ++j) {
            int a = mesh.node_index(i, j);
            int p = m.row_ptr[a];
            for (int di = -1; di <= 1; ++di) {
                if (i + di < 0 || i + di > mesh.nt) continue;
                for (int dj = -1; dj <= 1; ++dj) {
                    if (j + dj < 0 || j + dj > mesh.nx) continue;
                    m.col[p++] = mesh.node_index(i + di, j + dj);
                }
            }
        }
    }

    // One local 4x4 block serves every element of the uniform mesh. The
    // reference map scales derivatives by 2/dt in time and 2/dx in space and
    // carries the area factor dt*dx/4.
    const ShapeTable& st = shape_table();
    const double dt = mesh.dt();
    const double dx = mesh.dx();
    const double scale_t = 2.0 / dt;
    const double scale_x = 2.0 / dx;
    const double jac = dt * dx / 4.0;
    double local[4][4] = {};
    for (const int q : {0, 1, 2, 3}) {
        const double w = gauss_2x2()[q].weight * jac;
        for (int a = 0; a < 4; ++a) {
            const double at = scale_t * st.dxi[q][a];
            const double ax = scale_x * st.deta[q][a];
            for (int b = 0; b < 4; ++b) {
                const double bt = scale_t * st.dxi[q][b];
                const double bx = scale_x * st.deta[q][b];
                local[a][b] += w * (at * bt + ax * bx);
            }
        }
    }

    for (int ei = 0; ei < mesh.nt; ++ei) {
        for (int ej = 0; ej < mesh.nx; ++ej) {
            const auto nodes = mesh.element_nodes(ei, ej);
            for (int a = 0; a < 4; ++a) {
                for (int b = 0; b < 4; ++b) {
                    m.val[find_entry(m, nodes[a], nodes[b])] += local[a][b];
                }
            }
        }
    }
    return system;
}

bool is_final_time_node(const SpaceTimeMesh& mesh, int node) {
    return node >= mesh.nt * (mesh.nx + 1);
}

SparseSpdSystem apply_final_time_constraint(SparseSpdSystem system) {
    SparseMatrix& m = system.matrix;
    const SpaceTimeMesh& mesh = system.mesh;
    for (int a = 0; a < m.n; ++a) {
        const bool row_constrained = is_final_time_node(mesh, a);
        for (int p = m.row_ptr[a]; p < m.row_ptr[a + 1]; ++p) {
            const bool col_constrained = is_final_time_node(mesh, m.col[p]);
            if (row_constrained || col_constrained) {
                m.val[p] = (a == m.col[p]) ? 1.0 : 0.0;
            }
        }
        if (row_constrained) system.rhs[a] = 0.0;
    }
    system.final_time_constrained = true;
    return system;
}

NodalField solve_spd(const SparseSpdSystem& system, const CgOptions& options) {
    if (!system.final_time_constrained) {
        throw std::invalid_argument(
            "solve_spd: system must have the final-time constraint applied");
    }
    if (!(options.rel_tol > 0.0)) {
        throw std::invalid_argument("solve_spd: rel_tol must be positive");
    }
    const SparseMatrix& A = system.matrix;
    const std::vector<double>& b = system.rhs;
    const int n = A.n;
    NodalField x(system.mesh, 0.0);

    double b_norm2 = 0.0;
    for (double v : b) b_norm2 += v * v;
    if (b_norm2 == 0.0) return x;  // homogeneous data, exact zero solution
    const double target = options.rel_tol * std::sqrt(b_norm2);

    const int n_free = system.mesh.nt * (system.mesh.nx + 1);
    const int max_iters = options.max_iters > 0 ? options.max_iters : 10 * n_free;

    std::vector<double> inv_diag;
    if (options.jacobi_preconditioner) {
        inv_diag.assign(static_cast<size_t>(n), 1.0);
        for (int i = 0; i < n; ++i) {
            for (int p = A.row_ptr[i]; p < A.row_ptr[i + 1]; ++p) {
                if (A.col[p] == i && A.val[p] != 0.0) inv_diag[i] = 1.0 / A.val[p];
            }
        }
    }

    if (options.warm_start != nullptr) {
        require_same_mesh(options.warm_start->mesh, system.mesh, "solve_spd");
        x.values = options.warm_start->values;
        // Keep the constrained subspace exact regardless of the guess.
        for (int a = n_free; a < n; ++a) x.values[a] = 0.0;
    }

    std::vector<double> r(static_cast<size_t>(n)), p(static_cast<size_t>(n)),
        Ap(static_cast<size_t>(n)), z;
    A.multiply(x.values.data(), r.data());
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];

    auto apply_precond = [&](const std::vector<double>& in, std::vector<double>& out) {
        out.resize(in.size());
        for (int i = 0; i < n; ++i) out[i] = inv_diag[i] * in[i];
    };

    double rz;
    if (options.jacobi_preconditioner) {
        apply_precond(r, z);
        p = z;
        rz = 0.0;
        for (int i = 0; i < n; ++i) rz += r[i] * z[i];
    } else {
        p = r;
        rz = 0.0;
        for (double v : r) rz += v * v;
    }

    int iters = 0;
    while (iters < max_iters) {
        double r_norm = 0.0;
        for (double v : r) r_norm += v * v;
        r_norm = std::sqrt(r_norm);
        if (r_norm <= target) {
            // The recursive residual can drift from the true one; accept only
            // if the recomputed residual agrees, otherwise restart from x.
            A.multiply(x.values.data(), Ap.data());
            double true_norm = 0.0;
            for (int i = 0; i < n; ++i) {
                const double ri = b[i] - Ap[i];
                true_norm += ri * ri;
            }
            true_norm = std::sqrt(true_norm);
            if (true_norm <= target * 1.0000001) return x;
            for (int i = 0; i < n; ++i) r[i] = b[i] - Ap[i];
            if (options.jacobi_preconditioner) {
                apply_precond(r, z);
                p = z;
                rz = 0.0;
                for (int i = 0; i < n; ++i) rz += r[i] * z[i];
            } else {
                p = r;
                rz = 0.0;
                for (double v : r) rz += v * v;
            }
        }

        A.multiply(p.data(), Ap.data());
        double pAp = 0.0;
        for (int i = 0; i < n; ++i) pAp += p[i] * Ap[i];
        if (!(pAp > 0.0)) {
            throw SolveFailure("solve_spd: curvature p^T A p not positive; system is "
                               "not positive definite on the free subspace");
        }
        const double alpha = rz / pAp;
        for (int i = 0; i < n; ++i) {
            x.values[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        double rz_next;
        if (options.jacobi_preconditioner) {
            apply_precond(r, z);
            rz_next = 0.0;
            for (int i = 0; i < n; ++i) rz_next += r[i] * z[i];
        } else {
            rz_next = 0.0;
            for (double v : r) rz_next += v * v;
        }
        const double beta = rz_next / rz;
        rz = rz_next;
        if (options.jacobi_preconditioner) {
            for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        } else {
            for (int i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
        }
        ++iters;
    }

    double r_norm = 0.0;
    for (double v : r) r_norm += v * v;
    throw SolveFailure("solve_spd: conjugate gradients did not reach rel_tol=" +
                       std::to_string(options.rel_tol) + " within " +
                       std::to_string(max_iters) + " iterations (residual " +
                       std::to_string(std::sqrt(r_norm)) + ", target " +
                       std::to_string(target) + ")");
}

NodalField solve_spd(const SparseSpdSystem& system, double rel_tol) {
    CgOptions options;
    options.rel_tol = rel_tol;
    return solve_spd(system, options);
}

std::vector<double> lumped_mass_vector(const SpaceTimeMesh& mesh) {
    std::vector<double> m(static_cast<size_t>(mesh.num_nodes()), 0.0);
    const ShapeTable& st = shape_table();
    const double jac = mesh.dt() * mesh.dx() / 4.0;
    double local[4] = {};
    for (int q = 0; q < 4; ++q) {
        for (int k = 0; k < 4; ++k) local[k] += gauss_2x2()[q].weight * jac * st.n[q][k];
    }
    for (int ei = 0; ei < mesh.nt; ++ei) {
        for (int ej = 0; ej < mesh.nx; ++ej) {
            const auto nodes = mesh.element_nodes(ei, ej);
            for (int k = 0; k < 4; ++k) m[nodes[k]] += local[k];
        }
    }
    return m;
}

QuadDerivatives field_derivatives(const NodalField& field) {
    const SpaceTimeMesh& mesh = field.mesh;
    QuadDerivatives out;
    out.mesh = mesh;
    out.d_t.resize(static_cast<size_t>(mesh.num_elements()) * 4);
    out.d_x.resize(static_cast<size_t>(mesh.num_elements()) * 4);
    const ShapeTable& st = shape_table();
    const double scale_t = 2.0 / mesh.dt();
    const double scale_x = 2.0 / mesh.dx();
    for (int ei = 0; ei < mesh.nt; ++ei) {
        for (int ej = 0; ej < mesh.nx; ++ej) {
            const auto nodes = mesh.element_nodes(ei, ej);
            const size_t base = (static_cast<size_t>(ei) * mesh.nx + ej) * 4;
            for (int q = 0; q < 4; ++q) {
                double dt_val = 0.0, dx_val = 0.0;
                for (int k = 0; k < 4; ++k) {
                    const double u = field.values[nodes[k]];
                    dt_val += u * st.dxi[q][k];
                    dx_val += u * st.deta[q][k];
                }
                out.d_t[base + q] = scale_t * dt_val;
                out.d_x[base + q] = scale_x * dx_val;
            }
        }
    }
    return out;
}

std::vector<double> quad_values(const NodalField& field) {
    const SpaceTimeMesh& mesh = field.mesh;
    std::vector<double> out(static_cast<size_t>(mesh.num_elements()) * 4);
    const ShapeTable& st = shape_table();
    for (int ei = 0; ei < mesh.nt; ++ei) {
        for (int ej = 0; ej < mesh.nx; ++ej) {
            const auto nodes = mesh.element_nodes(ei, ej);
            const size_t base = (static_cast<size_t>(ei) * mesh.nx + ej) * 4;
            for (int q = 0; q < 4; ++q) {
                double v = 0.0;
                for (int k = 0; k < 4; ++k) v += field.values[nodes[k]] * st.n[q][k];
                out[base + q] = v;
            }
        }
    }
    return out;
}

double integrate_h1_pairing(const NodalField& a, const NodalField& b) {
    require_same_mesh(a.mesh, b.mesh, "integrate_h1_pairing");
    const SpaceTimeMesh& mesh = a.mesh;
    const ShapeTable& st = shape_table();
    const double scale_t = 2.0 / mesh.dt();
    const double scale_x = 2.0 / mesh.dx();
    const double jac = mesh.dt() * mesh.dx() / 4.0;
    double total = 0.0;
    for (int ei = 0; ei < mesh.nt; ++ei) {
        for (int ej = 0; ej < mesh.nx; ++ej) {
            const auto nodes = mesh.element_nodes(ei, ej);
            for (int q = 0; q < 4; ++q) {
                double at = 0.0, ax = 0.0, bt = 0.0, bx = 0.0;
                for (int k = 0; k < 4; ++k) {
                    at += a.values[nodes[k]] * st.dxi[q][k];
                    ax += a.values[nodes[k]] * st.deta[q][k];
                    bt += b.values[nodes[k]] * st.dxi[q][k];
                    bx += b.values[nodes[k]] * st.deta[q][k];
                }
                total += gauss_2x2()[q].weight * jac *
                         (scale_t * at * scale_t * bt + scale_x * ax * scale_x * bx);
            }
        }
    }
    return total;
}

std::vector<double> stiffness_apply(const NodalField& field) {
    const SpaceTimeMesh& mesh = field.mesh;
    const ShapeTable& st = shape_table();
    const double scale_t = 2.0 / mesh.dt();
    const double scale_x = 2.0 / mesh.dx();
    const double jac = mesh.dt() * mesh.dx() / 4.0;
    std::vector<double> out(static_cast<size_t>(mesh.num_nodes()), 0.0);
    for (int ei = 0; ei < mesh.nt; ++ei) {
        for (int ej = 0; ej < mesh.nx; ++ej) {
            const auto nodes = mesh.element_nodes(ei, ej);
            for (int q = 0; q < 4; ++q) {
                double ut = 0.0, ux = 0.0;
                for (int k = 0; k < 4; ++k) {
                    ut += field.values[nodes[k]] * st.dxi[q][k];
                    ux += field.values[nodes[k]] * st.deta[q][k];
                }
                ut *= scale_t;
                ux *= scale_x;
                const double w = gauss_2x2()[q].weight * jac;
                for (int k = 0; k < 4; ++k) {
                    out[nodes[k]] += w * (ut * scale_t * st.dxi[q][k] +
                                          ux * scale_x * st.deta[q][k]);
                }
            }
        }
    }
    return out;
}

double lumped_l2_pairing(const NodalField& a, const NodalField& b) {
    require_same_mesh(a.mesh, b.mesh, "lumped_l2_pairing");
    const std::vector<double> m = lumped_mass_vector(a.mesh);
    double total = 0.0;
    for (size_t i = 0; i < m.size(); ++i) total += m[i] * a.values[i] * b.values[i];
    return total;
}

double lumped_l2_norm(const NodalField& a) {
    return std::sqrt(lumped_l2_pairing(a, a));
}

double h1_norm(const NodalField& a) {
    return std::sqrt(integrate_h1_pairing(a, a) + lumped_l2_pairing(a, a));
}

NodalField interpolate_function(const SpaceTimeMesh& mesh,
                                const std::function<double(double, double)>& g) {
    NodalField field(mesh);
    for (int i = 0; i <= mesh.nt; ++i) {
        for (int j = 0; j <= mesh.nx; ++j) {
            const double value = g(mesh.node_t(i), mesh.node_x(j));
            if (!std::isfinite(value)) {
                throw std::invalid_argument(
                    "interpolate_function: non-finite sample at t=" +
                    std::to_string(mesh.node_t(i)) + " x=" +
                    std::to_string(mesh.node_x(j)));
            }
            field.values[mesh.node_index(i, j)] = value;
        }
    }
    return field;
}

}  // namespace varcons
