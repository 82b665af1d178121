#include "varcons/entropy.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "varcons/errors.hpp"

namespace varcons {

namespace {

// General banded matrix in the LAPACK dgbsv layout (column-major band
// storage with kl extra rows for pivoting fill-in).
struct BandedMatrix {
    int n = 0;
    int kl = 0;
    int ku = 0;
    int ldab = 0;
    std::vector<double> ab;

    BandedMatrix(int n_, int kl_, int ku_)
        : n(n_), kl(kl_), ku(ku_), ldab(2 * kl_ + ku_ + 1),
          ab(static_cast<size_t>(ldab) * n_, 0.0) {}

    void add(int i, int j, double value) {
        ab[static_cast<size_t>(j) * ldab + (kl + ku + i - j)] += value;
    }
    void set(int i, int j, double value) {
        ab[static_cast<size_t>(j) * ldab + (kl + ku + i - j)] = value;
    }
    void clear_row(int i) {
        const int j_lo = std::max(0, i - kl);
        const int j_hi = std::min(n - 1, i + ku);
        for (int j = j_lo; j <= j_hi; ++j) set(i, j, 0.0);
    }
};

// Solves A x = b in place (b becomes x). A is overwritten by its
// factorization.
void banded_solve(BandedMatrix& A, std::vector<double>& b) {
    std::vector<lapack_int> ipiv(static_cast<size_t>(A.n));
    const lapack_int info = LAPACKE_dgbsv(LAPACK_COL_MAJOR, A.n, A.kl, A.ku, 1,
                                          A.ab.data(), A.ldab, ipiv.data(), b.data(),
                                          A.n);
    if (info != 0) {
        throw SolveFailure("banded_solve: dgbsv failed with info=" +
                           std::to_string(info));
    }
}

struct DirichletData {
    std::vector<char> mask;     // 1 where the value is imposed
    std::vector<double> value;  // imposed values (0 elsewhere)
};

// Strong data for the viscous solve: lateral traces first, then the t = 0
// row, so the initial datum wins at the two bottom corners. The final-time
// row stays free (natural condition).
DirichletData viscous_dirichlet(const ProblemData& problem) {
    const SpaceTimeMesh& mesh = problem.mesh;
    DirichletData d;
    d.mask.assign(static_cast<size_t>(mesh.num_nodes()), 0);
    d.value.assign(static_cast<size_t>(mesh.num_nodes()), 0.0);
    for (int i = 0; i <= mesh.nt; ++i) {
        const double t = mesh.node_t(i);
        d.mask[mesh.node_index(i, 0)] = 1;
        d.value[mesh.node_index(i, 0)] = problem.u_left(t);
        d.mask[mesh.node_index(i, mesh.nx)] = 1;
        d.value[mesh.node_index(i, mesh.nx)] = problem.u_right(t);
    }
    for (int j = 0; j <= mesh.nx; ++j) {
        d.mask[mesh.node_index(0, j)] = 1;
        d.value[mesh.node_index(0, j)] = problem.u0(mesh.node_x(j));
    }
    return d;
}

// Residual of the weak viscous equation,
// R_a = eps integral(u_t phi_a,t + u_x phi_a,x)
//       + integral((u_t + f'(u) u_x) phi_a),
// with Dirichlet rows replaced by u_a - data_a. The optional Jacobian adds
// the Gateaux derivative, including the f''(u) u_x transport term, into
// banded storage (rows of Dirichlet nodes become identity).
void viscous_residual(const ProblemData& problem, double eps, const NodalField& u,
                      const DirichletData& dirichlet, std::vector<double>& residual,
                      BandedMatrix* jacobian) {
    const SpaceTimeMesh& mesh = problem.mesh;
    residual.assign(static_cast<size_t>(mesh.num_nodes()), 0.0);
    const double scale_t = 2.0 / mesh.dt();
    const double scale_x = 2.0 / mesh.dx();
    const double jac = mesh.dt() * mesh.dx() / 4.0;
    const auto& qps = gauss_2x2();

    double shape[4][4], dxi[4][4], deta[4][4];
    for (int q = 0; q < 4; ++q) {
        for (int k = 0; k < 4; ++k) {
            shape[q][k] = reference_shape(k, qps[q].xi, qps[q].eta);
            dxi[q][k] = reference_shape_dxi(k, qps[q].xi, qps[q].eta);
            deta[q][k] = reference_shape_deta(k, qps[q].xi, qps[q].eta);
        }
    }

    for (int ei = 0; ei < mesh.nt; ++ei) {
        for (int ej = 0; ej < mesh.nx; ++ej) {
            const auto nodes = mesh.element_nodes(ei, ej);
            for (int q = 0; q < 4; ++q) {
                double uq = 0.0, ut = 0.0, ux = 0.0;
                for (int k = 0; k < 4; ++k) {
                    const double un = u.values[nodes[k]];
                    uq += un * shape[q][k];
                    ut += un * dxi[q][k];
                    ux += un * deta[q][k];
                }
                ut *= scale_t;
                ux *= scale_x;
                const double fp = problem.flux.f_prime(uq);
                const double w = qps[q].weight * jac;
                for (int a = 0; a < 4; ++a) {
                    const double phi = shape[q][a];
                    const double phi_t = scale_t * dxi[q][a];
                    const double phi_x = scale_x * deta[q][a];
                    residual[nodes[a]] += w * (eps * (ut * phi_t + ux * phi_x) +
                                               (ut + fp * ux) * phi);
                }
                if (jacobian != nullptr) {
                    const double fpp = problem.flux.f_second(uq);
                    for (int a = 0; a < 4; ++a) {
                        const double phi = shape[q][a];
                        const double phi_t = scale_t * dxi[q][a];
                        const double phi_x = scale_x * deta[q][a];
                        for (int b = 0; b < 4; ++b) {
                            const double psi = shape[q][b];
                            const double psi_t = scale_t * dxi[q][b];
                            const double psi_x = scale_x * deta[q][b];
                            jacobian->add(nodes[a], nodes[b],
                                          w * (eps * (phi_t * psi_t + phi_x * psi_x) +
                                               phi * (psi_t + fp * psi_x +
                                                      fpp * ux * psi)));
                        }
                    }
                }
            }
        }
    }

    for (int a = 0; a < mesh.num_nodes(); ++a) {
        if (!dirichlet.mask[a]) continue;
        residual[a] = u.values[a] - dirichlet.value[a];
        if (jacobian != nullptr) {
            jacobian->clear_row(a);
            jacobian->set(a, a, 1.0);
        }
    }
}

double norm2(const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x * x;
    return std::sqrt(sum);
}

// One damped Newton run from the given start. Returns true on convergence,
// false on divergence (last residual reported through last_residual).
bool newton_attempt(const ProblemData& problem, double eps, double newton_tol,
                    int max_iters, NodalField& u, double& last_residual) {
    const SpaceTimeMesh& mesh = problem.mesh;
    const DirichletData dirichlet = viscous_dirichlet(problem);
    const int n = mesh.num_nodes();
    const int band = mesh.nx + 2;
    for (int a = 0; a < n; ++a) {
        if (dirichlet.mask[a]) u.values[a] = dirichlet.value[a];
    }

    std::vector<double> residual;
    viscous_residual(problem, eps, u, dirichlet, residual, nullptr);
    double res_norm = norm2(residual);
    last_residual = res_norm;

    for (int iter = 0; iter < max_iters; ++iter) {
        if (res_norm <= newton_tol) return true;
        BandedMatrix J(n, band, band);
        viscous_residual(problem, eps, u, dirichlet, residual, &J);
        std::vector<double> delta = residual;
        for (double& x : delta) x = -x;
        banded_solve(J, delta);

        // Damping: halve the step until the residual actually decreases.
        double lambda = 1.0;
        bool accepted = false;
        NodalField u_try(mesh);
        for (int h = 0; h < 30; ++h) {
            for (int a = 0; a < n; ++a) {
                u_try.values[a] = u.values[a] + lambda * delta[a];
            }
            std::vector<double> res_try;
            viscous_residual(problem, eps, u_try, dirichlet, res_try, nullptr);
            const double res_try_norm = norm2(res_try);
            if (std::isfinite(res_try_norm) && res_try_norm < res_norm) {
                u = u_try;
                res_norm = res_try_norm;
                last_residual = res_norm;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) return false;
    }
    return res_norm <= newton_tol;
}

}  // namespace

EntropyPair square_entropy_pair(const FluxModel& flux) {
    if (flux.coefficients.empty()) {
        throw std::invalid_argument("square_entropy_pair: flux carries no polynomial "
                                    "coefficients");
    }
    // psi' = u f'(u) = sum_k k c_k u^k, so psi = sum_k k c_k u^(k+1)/(k+1),
    // both exact polynomials.
    std::vector<double> psi_prime_coeffs(flux.coefficients.size(), 0.0);
    std::vector<double> psi_coeffs(flux.coefficients.size() + 1, 0.0);
    for (size_t k = 1; k < flux.coefficients.size(); ++k) {
        psi_prime_coeffs[k] = static_cast<double>(k) * flux.coefficients[k];
        psi_coeffs[k + 1] = static_cast<double>(k) * flux.coefficients[k] /
                            static_cast<double>(k + 1);
    }
    auto eval = [](std::vector<double> c) {
        return [c = std::move(c)](double u) {
            double acc = 0.0;
            for (size_t k = c.size(); k-- > 0;) acc = acc * u + c[k];
            return acc;
        };
    };
    EntropyPair pair;
    pair.phi = [](double u) { return 0.5 * u * u; };
    pair.phi_prime = [](double u) { return u; };
    pair.psi = eval(std::move(psi_coeffs));
    pair.psi_prime = eval(std::move(psi_prime_coeffs));
    return pair;
}

void validate_entropy_pair(const EntropyPair& pair, const FluxModel& flux,
                           double z_lo, double z_hi, int samples) {
    if (!(z_hi > z_lo) || samples < 3) {
        throw std::invalid_argument("validate_entropy_pair: need z_lo < z_hi and at "
                                    "least 3 samples");
    }
    const double h = (z_hi - z_lo) / (samples - 1);
    for (int s = 1; s + 1 < samples; ++s) {
        const double z = z_lo + s * h;
        const double second_diff =
            (pair.phi(z - h) - 2.0 * pair.phi(z) + pair.phi(z + h)) / (h * h);
        if (second_diff < -1e-10) {
            throw std::invalid_argument("validate_entropy_pair: phi fails convexity at z=" +
                                        std::to_string(z));
        }
    }
    for (int s = 0; s < samples; ++s) {
        const double z = z_lo + s * h;
        const double mismatch = std::abs(pair.psi_prime(z) - pair.phi_prime(z) * flux.f_prime(z));
        if (mismatch > 1e-10) {
            throw std::invalid_argument(
                "validate_entropy_pair: psi' != phi' f' at z=" + std::to_string(z) +
                " (mismatch " + std::to_string(mismatch) + ")");
        }
    }
}

namespace {

double bump_1d(double r) {
    if (std::abs(r) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

double bump_1d_prime(double r) {
    if (std::abs(r) >= 1.0) return 0.0;
    const double s = 1.0 - r * r;
    return bump_1d(r) * (-2.0 * r / (s * s));
}

}  // namespace

double SmoothBump::value(double t, double x) const {
    return bump_1d((t - center_t) / radius_t) * bump_1d((x - center_x) / radius_x);
}

double SmoothBump::d_t(double t, double x) const {
    return bump_1d_prime((t - center_t) / radius_t) / radius_t *
           bump_1d((x - center_x) / radius_x);
}

double SmoothBump::d_x(double t, double x) const {
    return bump_1d((t - center_t) / radius_t) *
           bump_1d_prime((x - center_x) / radius_x) / radius_x;
}

double perturbed_energy(const ProblemData& problem, const NodalField& u, double epsilon,
                        double rel_tol) {
    if (epsilon < 0.0) {
        throw std::invalid_argument("perturbed_energy: epsilon must be nonnegative");
    }
    require_same_mesh(u.mesh, problem.mesh, "perturbed_energy");
    const double seminorm_term = 0.5 * epsilon * epsilon * integrate_h1_pairing(u, u);
    return seminorm_term + compute_defect(problem, u, rel_tol).energy;
}

NodalField viscous_newton_solve(const ProblemData& problem, double epsilon,
                                double newton_tol, int max_iters) {
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("viscous_newton_solve: epsilon must be positive");
    }
    if (!(newton_tol > 0.0)) {
        throw std::invalid_argument("viscous_newton_solve: newton_tol must be positive");
    }
    const SpaceTimeMesh& mesh = problem.mesh;

    // Start from the initial datum extended upward in time, with all strong
    // data imposed inside newton_attempt.
    NodalField u(mesh);
    for (int i = 0; i <= mesh.nt; ++i) {
        for (int j = 0; j <= mesh.nx; ++j) {
            u(i, j) = problem.u0(mesh.node_x(j));
        }
    }
    double last_residual = 0.0;
    if (newton_attempt(problem, epsilon, newton_tol, max_iters, u, last_residual)) {
        return u;
    }

    // Continuation fallback: the equation is easier at larger viscosity, so
    // walk eps down from a mild value, reusing each stage's solution as the
    // next stage's start.
    NodalField u_cont(mesh);
    for (int i = 0; i <= mesh.nt; ++i) {
        for (int j = 0; j <= mesh.nx; ++j) {
            u_cont(i, j) = problem.u0(mesh.node_x(j));
        }
    }
    double eps_stage = std::max(4.0 * epsilon, 0.4);
    while (true) {
        double stage_residual = 0.0;
        if (!newton_attempt(problem, eps_stage, newton_tol, max_iters, u_cont,
                            stage_residual)) {
            throw NewtonDivergence(
                "viscous_newton_solve: Newton diverged at continuation stage eps=" +
                    std::to_string(eps_stage) + " (last residual " +
                    std::to_string(stage_residual) +
                    "); try a smaller epsilon step or a finer mesh",
                stage_residual);
        }
        if (eps_stage == epsilon) return u_cont;
        eps_stage = std::max(epsilon, 0.5 * eps_stage);
    }
}

double defect_proportionality_check(const ProblemData& problem, const NodalField& u_eps,
                                    double epsilon, double rel_tol) {
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument(
            "defect_proportionality_check: epsilon must be positive");
    }
    require_same_mesh(u_eps.mesh, problem.mesh, "defect_proportionality_check");
    const NodalField v = compute_defect(problem, u_eps, rel_tol).v;
    const double u_norm = h1_norm(u_eps);
    const double v_norm = h1_norm(v);
    if (u_norm == 0.0) {
        if (v_norm <= 1e-14) return 0.0;
        throw std::domain_error("defect_proportionality_check: u_eps has zero H1 norm "
                                "but its defect does not; the ratio is undefined");
    }
    NodalField diff(problem.mesh);
    double best = 0.0;
    for (const double sign : {1.0, -1.0}) {
        for (size_t a = 0; a < diff.values.size(); ++a) {
            diff.values[a] = v.values[a] - sign * epsilon * u_eps.values[a];
        }
        const double discrepancy = h1_norm(diff) / (epsilon * u_norm);
        if (sign == 1.0 || discrepancy < best) best = discrepancy;
    }
    return best;
}

double entropy_residual(const NodalField& u, const EntropyPair& pair,
                        const SmoothBump& test) {
    const SpaceTimeMesh& mesh = u.mesh;
    if (!(test.radius_t > 0.0) || !(test.radius_x > 0.0)) {
        throw std::invalid_argument("entropy_residual: bump radii must be positive");
    }
    if (test.center_t - test.radius_t <= 0.0 ||
        test.center_t + test.radius_t >= mesh.t_final ||
        test.center_x - test.radius_x <= mesh.x_min ||
        test.center_x + test.radius_x >= mesh.x_max) {
        throw std::invalid_argument("entropy_residual: bump support must lie inside "
                                    "the open space-time slab");
    }
    const double jac = mesh.dt() * mesh.dx() / 4.0;
    const auto& qps = gauss_2x2();
    const std::vector<double> uq = quad_values(u);
    double total = 0.0;
    for (int ei = 0; ei < mesh.nt; ++ei) {
        const double t_mid = 0.5 * (mesh.node_t(ei) + mesh.node_t(ei + 1));
        for (int ej = 0; ej < mesh.nx; ++ej) {
            const double x_mid = 0.5 * (mesh.node_x(ej) + mesh.node_x(ej + 1));
            const size_t base = (static_cast<size_t>(ei) * mesh.nx + ej) * 4;
            for (int q = 0; q < 4; ++q) {
                const double t = t_mid + 0.5 * mesh.dt() * qps[q].xi;
                const double x = x_mid + 0.5 * mesh.dx() * qps[q].eta;
                total -= qps[q].weight * jac *
                         (pair.phi(uq[base + q]) * test.d_t(t, x) +
                          pair.psi(uq[base + q]) * test.d_x(t, x));
            }
        }
    }
    return total;
}

}  // namespace varcons
