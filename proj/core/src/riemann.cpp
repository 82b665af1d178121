#include "varcons/riemann.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "varcons/errors.hpp"

namespace varcons {

namespace {

// Monotone bisection for f'(z) = target on [lo, hi]; f' is nondecreasing on
// the bracket for convex f. 60 halvings pin the root to far below rounding
// at the state scales in play.
double invert_f_prime(const FluxModel& flux, double target, double lo, double hi) {
    double flo = flux.f_prime(lo) - target;
    if (flo >= 0.0) return lo;
    if (flux.f_prime(hi) - target <= 0.0) return hi;
    for (int iter = 0; iter < 60; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (flux.f_prime(mid) - target <= 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Minimum of convex f over [lo, hi]: at an endpoint when f' keeps one sign,
// otherwise at the interior stationary point.
double convex_min(const FluxModel& flux, double lo, double hi) {
    if (flux.f_prime(lo) >= 0.0) return flux.f(lo);
    if (flux.f_prime(hi) <= 0.0) return flux.f(hi);
    return flux.f(invert_f_prime(flux, 0.0, lo, hi));
}

// Godunov interface flux for convex f: minimum of f over [a, b] when
// a <= b, maximum of the endpoint values otherwise.
double godunov_flux(const FluxModel& flux, double a, double b) {
    if (a <= b) return convex_min(flux, a, b);
    return std::max(flux.f(a), flux.f(b));
}

double total_variation(const std::vector<double>& extended) {
    double tv = 0.0;
    for (size_t i = 0; i + 1 < extended.size(); ++i) {
        tv += std::abs(extended[i + 1] - extended[i]);
    }
    return tv;
}

}  // namespace

void validate_convexity(const RiemannProblem& problem) {
    const double lo = std::min(problem.u_left, problem.u_right);
    const double hi = std::max(problem.u_left, problem.u_right);
    if (!(hi > lo)) return;  // single state, nothing to check
    const int samples = 33;
    const double h = (hi - lo) / (samples + 1);
    for (int s = 1; s <= samples; ++s) {
        const double z = lo + s * h;
        const double second_diff =
            (problem.flux.f(z - h) - 2.0 * problem.flux.f(z) + problem.flux.f(z + h)) /
            (h * h);
        if (second_diff < -1e-10) {
            throw std::invalid_argument(
                "exact Riemann solution requires convex flux; f'' < 0 near z=" +
                std::to_string(z) + " for flux '" + problem.flux.name + "'");
        }
    }
}

double exact_riemann(const RiemannProblem& problem, double t, double x) {
    if (t < 0.0) {
        throw std::invalid_argument("exact_riemann: t must be nonnegative");
    }
    validate_convexity(problem);
    const double uL = problem.u_left;
    const double uR = problem.u_right;
    if (uL == uR) return uL;
    const double mean = 0.5 * (uL + uR);
    if (t == 0.0) {
        if (x < 0.0) return uL;
        if (x > 0.0) return uR;
        return mean;
    }
    if (uL > uR) {
        const double speed = (problem.flux.f(uL) - problem.flux.f(uR)) / (uL - uR);
        const double line = speed * t;
        if (x < line) return uL;
        if (x > line) return uR;
        return mean;
    }
    // Rarefaction fan between the characteristic speeds of the two states.
    const double xi = x / t;
    if (xi <= problem.flux.f_prime(uL)) return uL;
    if (xi >= problem.flux.f_prime(uR)) return uR;
    if (problem.flux.name == "burgers") return xi;
    return invert_f_prime(problem.flux, xi, uL, uR);
}

GodunovResult godunov_reference(const RiemannProblem& problem,
                                const std::function<double(double)>& u0, int nx,
                                double t_final, double cfl, double x_min, double x_max,
                                std::vector<double> sample_times) {
    if (nx < 1) throw std::invalid_argument("godunov_reference: need nx >= 1");
    if (!(cfl > 0.0) || cfl > 1.0) {
        throw std::invalid_argument("godunov_reference: cfl must lie in (0, 1]");
    }
    if (!(t_final > 0.0) || !(x_max > x_min)) {
        throw std::invalid_argument("godunov_reference: need t_final > 0 and "
                                    "x_min < x_max");
    }
    validate_convexity(problem);

    const double dx = (x_max - x_min) / nx;
    GodunovResult result;
    result.x_centers.resize(static_cast<size_t>(nx));
    for (int i = 0; i < nx; ++i) result.x_centers[i] = x_min + (i + 0.5) * dx;

    // Extended state with one Dirichlet ghost cell per side holding the
    // Riemann states. Cells are initialized by midpoint sampling of u0.
    std::vector<double> u(static_cast<size_t>(nx) + 2);
    u.front() = problem.u_left;
    u.back() = problem.u_right;
    for (int i = 0; i < nx; ++i) {
        const double value = u0(result.x_centers[i]);
        if (!std::isfinite(value)) {
            throw std::invalid_argument("godunov_reference: u0 not finite at x=" +
                                        std::to_string(result.x_centers[i]));
        }
        u[static_cast<size_t>(i) + 1] = value;
    }
    result.tv_initial = total_variation(u);
    result.tv_max = result.tv_initial;

    // Capture schedule: requested times clipped to (0, t_final], ascending,
    // deduplicated, with t_final always present. A request at exactly 0
    // captures the initial averages.
    std::sort(sample_times.begin(), sample_times.end());
    std::vector<double> schedule;
    for (double s : sample_times) {
        if (s < 0.0 || s > t_final) {
            throw std::invalid_argument("godunov_reference: sample time outside "
                                        "[0, t_final]");
        }
        if (schedule.empty() || s > schedule.back()) schedule.push_back(s);
    }
    if (schedule.empty() || schedule.back() < t_final) schedule.push_back(t_final);

    size_t next_capture = 0;
    auto capture = [&](double time) {
        result.times.push_back(time);
        result.states.emplace_back(u.begin() + 1, u.end() - 1);
    };
    if (schedule[0] == 0.0) {
        capture(0.0);
        ++next_capture;
    }

    std::vector<double> flux_at(static_cast<size_t>(nx) + 1);
    double t = 0.0;
    while (t < t_final) {
        double max_speed = 0.0;
        for (double value : u) {
            max_speed = std::max(max_speed, std::abs(problem.flux.f_prime(value)));
        }
        double dt = max_speed > 0.0 ? cfl * dx / max_speed : t_final - t;
        dt = std::min(dt, schedule[next_capture] - t);
        if (!(dt > 0.0) || !std::isfinite(dt)) {
            throw SolveFailure("godunov_reference: CFL step collapsed to dt=" +
                               std::to_string(dt) + " at t=" + std::to_string(t));
        }
        for (int i = 0; i <= nx; ++i) {
            flux_at[i] = godunov_flux(problem.flux, u[i], u[i + 1]);
        }
        const double lambda = dt / dx;
        for (int i = 1; i <= nx; ++i) {
            u[i] -= lambda * (flux_at[i] - flux_at[i - 1]);
        }
        t += dt;
        ++result.steps;

        const double tv = total_variation(u);
        result.tv_max = std::max(result.tv_max, tv);
        if (tv > result.tv_initial + 1e-12 * std::max(1.0, result.tv_initial)) {
            throw SolveFailure("godunov_reference: total variation grew from " +
                               std::to_string(result.tv_initial) + " to " +
                               std::to_string(tv) + " at t=" + std::to_string(t));
        }
        if (t >= schedule[next_capture]) {
            capture(t);
            ++next_capture;
        }
    }
    return result;
}

double l2_error_vs_exact(const NodalField& field, const RiemannProblem& problem,
                         double exclude_band) {
    if (exclude_band < 0.0) {
        throw std::invalid_argument("l2_error_vs_exact: exclude_band must be "
                                    "nonnegative");
    }
    validate_convexity(problem);
    const SpaceTimeMesh& mesh = field.mesh;
    const double uL = problem.u_left;
    const double uR = problem.u_right;

    // Discontinuity lines to discount: the shock line for uL > uR, the two
    // fan edges for uL < uR, none for equal states.
    double speeds[2];
    int num_lines = 0;
    if (uL > uR) {
        speeds[num_lines++] = (problem.flux.f(uL) - problem.flux.f(uR)) / (uL - uR);
    } else if (uL < uR) {
        speeds[num_lines++] = problem.flux.f_prime(uL);
        speeds[num_lines++] = problem.flux.f_prime(uR);
    }

    const auto& qps = gauss_2x2();
    const double jac = mesh.dt() * mesh.dx() / 4.0;
    const std::vector<double> uq = quad_values(field);
    double err2 = 0.0;
    for (int ei = 0; ei < mesh.nt; ++ei) {
        const double t_mid = 0.5 * (mesh.node_t(ei) + mesh.node_t(ei + 1));
        for (int ej = 0; ej < mesh.nx; ++ej) {
            const double x_mid = 0.5 * (mesh.node_x(ej) + mesh.node_x(ej + 1));
            const size_t base = (static_cast<size_t>(ei) * mesh.nx + ej) * 4;
            for (int q = 0; q < 4; ++q) {
                const double t = t_mid + 0.5 * mesh.dt() * qps[q].xi;
                const double x = x_mid + 0.5 * mesh.dx() * qps[q].eta;
                bool excluded = false;
                for (int l = 0; l < num_lines; ++l) {
                    if (std::abs(x - speeds[l] * t) <= exclude_band) {
                        excluded = true;
                        break;
                    }
                }
                if (excluded) continue;
                const double diff = uq[base + q] - exact_riemann(problem, t, x);
                err2 += qps[q].weight * jac * diff * diff;
            }
        }
    }
    return std::sqrt(err2);
}

}  // namespace varcons
