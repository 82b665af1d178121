#include "varcons/flux.hpp"

#include <cmath>
#include <stdexcept>

namespace varcons {

namespace {

// Horner evaluation of a polynomial with constant term first.
double poly_eval(const std::vector<double>& c, double u) {
    double acc = 0.0;
    for (size_t k = c.size(); k-- > 0;) acc = acc * u + c[k];
    return acc;
}

std::vector<double> poly_derivative(const std::vector<double>& c) {
    if (c.size() <= 1) return {0.0};
    std::vector<double> d(c.size() - 1);
    for (size_t k = 1; k < c.size(); ++k) d[k - 1] = static_cast<double>(k) * c[k];
    return d;
}

FluxModel from_coefficients(std::string name, std::vector<double> coeffs) {
    if (coeffs.empty()) coeffs = {0.0};
    for (double c : coeffs) {
        if (!std::isfinite(c)) {
            throw std::invalid_argument("builtin_flux: non-finite coefficient");
        }
    }
    FluxModel model;
    model.name = std::move(name);
    model.coefficients = coeffs;
    int degree = 0;
    for (size_t k = 0; k < coeffs.size(); ++k) {
        if (coeffs[k] != 0.0) degree = static_cast<int>(k);
    }
    model.growth_degree = degree > 0 ? degree : 1;
    const std::vector<double> d1 = poly_derivative(coeffs);
    const std::vector<double> d2 = poly_derivative(d1);
    model.f = [coeffs](double u) { return poly_eval(coeffs, u); };
    model.f_prime = [d1](double u) { return poly_eval(d1, u); };
    model.f_second = [d2](double u) { return poly_eval(d2, u); };
    return model;
}

}  // namespace

FluxModel builtin_flux(const std::string& name, const std::vector<double>& params) {
    if (name == "burgers") {
        return from_coefficients("burgers", {0.0, 0.0, 0.5});
    }
    if (name == "linear") {
        if (params.size() != 1) {
            throw std::invalid_argument("builtin_flux: linear flux takes exactly one "
                                        "parameter, the advection speed");
        }
        return from_coefficients("linear", {0.0, params[0]});
    }
    if (name == "polynomial") {
        if (params.empty()) {
            throw std::invalid_argument("builtin_flux: polynomial flux needs a "
                                        "coefficient list, constant term first");
        }
        return from_coefficients("polynomial", params);
    }
    throw std::invalid_argument("builtin_flux: unknown flux name '" + name +
                                "' (expected burgers, linear, or polynomial)");
}

CommutationReport check_commutation(const SystemFlux& sys,
                                    const std::vector<std::vector<double>>& sample_states,
                                    double tol) {
    if (sys.state_dim < 1 || sys.space_dim < 1) {
        throw std::invalid_argument("check_commutation: need state_dim >= 1 and "
                                    "space_dim >= 1");
    }
    if (sample_states.empty()) {
        throw std::invalid_argument("check_commutation: need at least one sample state");
    }
    const int N = sys.state_dim;
    const size_t nn = static_cast<size_t>(N) * N;

    auto jac_at = [&](int j, const std::vector<double>& u) {
        std::vector<double> m = sys.jacobian(j, u);
        if (m.size() != nn) {
            throw std::invalid_argument("check_commutation: jacobian(" +
                                        std::to_string(j) + ") is not N x N");
        }
        return m;
    };

    CommutationReport report;
    std::vector<double> prod_jk(nn), prod_kj(nn);
    for (const auto& u : sample_states) {
        // Commutators are antisymmetric in (j, k); same Frobenius norm either
        // way, so only the pairs with j <= k are visited.
        for (int j = 0; j < sys.space_dim; ++j) {
            const std::vector<double> a = jac_at(j, u);
            for (int k = j; k < sys.space_dim; ++k) {
                const std::vector<double> b = jac_at(k, u);
                for (int r = 0; r < N; ++r) {
                    for (int c = 0; c < N; ++c) {
                        double jk = 0.0, kj = 0.0;
                        for (int s = 0; s < N; ++s) {
                            jk += a[r * N + s] * b[s * N + c];
                            kj += b[r * N + s] * a[s * N + c];
                        }
                        prod_jk[r * N + c] = jk;
                        prod_kj[r * N + c] = kj;
                    }
                }
                double frob2 = 0.0;
                for (size_t e = 0; e < nn; ++e) {
                    const double d = prod_jk[e] - prod_kj[e];
                    frob2 += d * d;
                }
                report.max_residual = std::max(report.max_residual, std::sqrt(frob2));
            }
        }
    }
    report.commutes = report.max_residual <= tol;
    return report;
}

}  // namespace varcons
