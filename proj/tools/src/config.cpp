#include "varcons_run/config.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "varcons/riemann.hpp"

namespace varcons::cli {

namespace {

using nlohmann::json;

json defaults_json() {
    // One authoritative defaults object; load_config layers file values and
    // command-line overrides on top and then type-checks the result.
    return json{
        {"mesh", {{"nt", 64}, {"nx", 64}}},
        {"domain", {{"t_final", 1.0}, {"x_min", -1.0}, {"x_max", 1.0}}},
        {"flux", {{"kind", "burgers"}, {"speed", 1.0}, {"coefficients", json::array()}}},
        {"data",
         {{"u_left", 1.0},
          {"u_right", -1.0},
          {"u0_kind", "riemann"},
          {"u0_coefficients", json::array()}}},
        {"descent",
         {{"max_iters", 200},
          {"energy_tol", 1e-12},
          {"grad_tol", 1e-10},
          {"backtracking", true},
          {"shrink", 0.5},
          {"max_halvings", 30},
          {"record_every", 10},
          {"max_stored_iterates", 200},
          {"solve_rel_tol", 1e-10},
          {"perturbation_epsilon", 0.0},
          {"pin_data_boundary", false},
          {"init", "zero"}}},
        {"entropy",
         {{"epsilons", json::array({0.2, 0.1, 0.05})},
          {"newton_tol", 1e-8},
          {"newton_max_iters", 50},
          {"bump_center_t", 0.5},
          {"bump_center_x", 0.0},
          {"bump_radius_t", 0.4},
          {"bump_radius_x", 0.4}}},
        {"ym",
         {{"bins", 3},
          {"coarsen", 4},
          {"z_min", -1.5},
          {"z_max", 1.5},
          {"tail_fraction", 0.5},
          {"e_factor", 1e-4},
          {"increment_factor", 1e-3},
          {"gradient_factor", 1e-3}}},
        {"checks",
         {{"gradient_tol", 1e-5},
          {"gradient_pairs", 10},
          {"gradient_fd_step", 1e-4},
          {"oracle_tol", 1e-10},
          {"cross_oracle_tol", 0.05},
          {"mesh_sizes", json::array({16, 32, 64})},
          {"godunov_cells", 512},
          {"godunov_cfl", 0.9}}},
        {"output", {{"directory", "out"}}},
        {"seed", 12345},
    };
}

[[noreturn]] void fail(const std::string& message) {
    throw std::invalid_argument("config: " + message);
}

void merge_section(json& base, const json& patch, const std::string& section) {
    for (const auto& [key, value] : patch.items()) {
        if (!base.contains(key)) {
            fail("unknown key '" + (section.empty() ? key : section + "." + key) + "'");
        }
        base[key] = value;
    }
}

void merge(json& base, const json& patch) {
    if (!patch.is_object()) fail("config file must hold a JSON object");
    for (const auto& [key, value] : patch.items()) {
        if (!base.contains(key)) fail("unknown section '" + key + "'");
        if (base[key].is_object()) {
            if (!value.is_object()) fail("section '" + key + "' must be an object");
            merge_section(base[key], value, key);
        } else {
            base[key] = value;
        }
    }
}

double as_number(const json& j, const std::string& where) {
    if (!j.is_number()) fail("'" + where + "' must be a number");
    const double value = j.get<double>();
    if (!std::isfinite(value)) fail("'" + where + "' must be finite");
    return value;
}

int as_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) fail("'" + where + "' must be an integer");
    return j.get<int>();
}

bool as_bool(const json& j, const std::string& where) {
    if (!j.is_boolean()) fail("'" + where + "' must be a boolean");
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& where) {
    if (!j.is_string()) fail("'" + where + "' must be a string");
    return j.get<std::string>();
}

std::vector<double> as_number_list(const json& j, const std::string& where) {
    if (!j.is_array()) fail("'" + where + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& item : j) out.push_back(as_number(item, where));
    return out;
}

std::vector<int> as_int_list(const json& j, const std::string& where) {
    if (!j.is_array()) fail("'" + where + "' must be an array of integers");
    std::vector<int> out;
    for (const auto& item : j) out.push_back(as_int(item, where));
    return out;
}

RunConfig materialize(const json& j) {
    RunConfig c;
    c.mesh.nt = as_int(j["mesh"]["nt"], "mesh.nt");
    c.mesh.nx = as_int(j["mesh"]["nx"], "mesh.nx");
    c.domain.t_final = as_number(j["domain"]["t_final"], "domain.t_final");
    c.domain.x_min = as_number(j["domain"]["x_min"], "domain.x_min");
    c.domain.x_max = as_number(j["domain"]["x_max"], "domain.x_max");
    c.flux.kind = as_string(j["flux"]["kind"], "flux.kind");
    c.flux.speed = as_number(j["flux"]["speed"], "flux.speed");
    c.flux.coefficients = as_number_list(j["flux"]["coefficients"], "flux.coefficients");
    c.data.u_left = as_number(j["data"]["u_left"], "data.u_left");
    c.data.u_right = as_number(j["data"]["u_right"], "data.u_right");
    c.data.u0_kind = as_string(j["data"]["u0_kind"], "data.u0_kind");
    c.data.u0_coefficients =
        as_number_list(j["data"]["u0_coefficients"], "data.u0_coefficients");
    const json& d = j["descent"];
    c.descent.max_iters = as_int(d["max_iters"], "descent.max_iters");
    c.descent.energy_tol = as_number(d["energy_tol"], "descent.energy_tol");
    c.descent.grad_tol = as_number(d["grad_tol"], "descent.grad_tol");
    c.descent.backtracking = as_bool(d["backtracking"], "descent.backtracking");
    c.descent.shrink = as_number(d["shrink"], "descent.shrink");
    c.descent.max_halvings = as_int(d["max_halvings"], "descent.max_halvings");
    c.descent.record_every = as_int(d["record_every"], "descent.record_every");
    c.descent.max_stored_iterates =
        as_int(d["max_stored_iterates"], "descent.max_stored_iterates");
    c.descent.solve_rel_tol = as_number(d["solve_rel_tol"], "descent.solve_rel_tol");
    c.descent.perturbation_epsilon =
        as_number(d["perturbation_epsilon"], "descent.perturbation_epsilon");
    c.descent.pin_data_boundary =
        as_bool(d["pin_data_boundary"], "descent.pin_data_boundary");
    c.descent.init = as_string(d["init"], "descent.init");
    const json& e = j["entropy"];
    c.entropy.epsilons = as_number_list(e["epsilons"], "entropy.epsilons");
    c.entropy.newton_tol = as_number(e["newton_tol"], "entropy.newton_tol");
    c.entropy.newton_max_iters = as_int(e["newton_max_iters"], "entropy.newton_max_iters");
    c.entropy.bump_center_t = as_number(e["bump_center_t"], "entropy.bump_center_t");
    c.entropy.bump_center_x = as_number(e["bump_center_x"], "entropy.bump_center_x");
    c.entropy.bump_radius_t = as_number(e["bump_radius_t"], "entropy.bump_radius_t");
    c.entropy.bump_radius_x = as_number(e["bump_radius_x"], "entropy.bump_radius_x");
    const json& y = j["ym"];
    c.ym.bins = as_int(y["bins"], "ym.bins");
    c.ym.coarsen = as_int(y["coarsen"], "ym.coarsen");
    c.ym.z_min = as_number(y["z_min"], "ym.z_min");
    c.ym.z_max = as_number(y["z_max"], "ym.z_max");
    c.ym.tail_fraction = as_number(y["tail_fraction"], "ym.tail_fraction");
    c.ym.e_factor = as_number(y["e_factor"], "ym.e_factor");
    c.ym.increment_factor = as_number(y["increment_factor"], "ym.increment_factor");
    c.ym.gradient_factor = as_number(y["gradient_factor"], "ym.gradient_factor");
    const json& k = j["checks"];
    c.checks.gradient_tol = as_number(k["gradient_tol"], "checks.gradient_tol");
    c.checks.gradient_pairs = as_int(k["gradient_pairs"], "checks.gradient_pairs");
    c.checks.gradient_fd_step = as_number(k["gradient_fd_step"], "checks.gradient_fd_step");
    c.checks.oracle_tol = as_number(k["oracle_tol"], "checks.oracle_tol");
    c.checks.cross_oracle_tol =
        as_number(k["cross_oracle_tol"], "checks.cross_oracle_tol");
    c.checks.mesh_sizes = as_int_list(k["mesh_sizes"], "checks.mesh_sizes");
    c.checks.godunov_cells = as_int(k["godunov_cells"], "checks.godunov_cells");
    c.checks.godunov_cfl = as_number(k["godunov_cfl"], "checks.godunov_cfl");
    c.output.directory = as_string(j["output"]["directory"], "output.directory");
    if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0) {
        fail("'seed' must be a nonnegative integer");
    }
    c.seed = j["seed"].get<std::uint64_t>();

    if (c.data.u0_kind != "riemann" && c.data.u0_kind != "polynomial") {
        fail("data.u0_kind must be 'riemann' or 'polynomial'");
    }
    if (c.data.u0_kind == "polynomial" && c.data.u0_coefficients.empty()) {
        fail("data.u0_coefficients must be nonempty for polynomial u0");
    }
    if (c.descent.init != "zero" && c.descent.init != "data") {
        fail("descent.init must be 'zero' or 'data'");
    }
    if (!(c.ym.tail_fraction > 0.0) || c.ym.tail_fraction > 1.0) {
        fail("ym.tail_fraction must lie in (0, 1]");
    }
    return c;
}

}  // namespace

RunConfig load_config(const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>& overrides) {
    json merged = defaults_json();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) fail("cannot read config file '" + path + "'");
        json file_json;
        try {
            in >> file_json;
        } catch (const json::parse_error& err) {
            fail("invalid JSON in '" + path + "': " + err.what());
        }
        merge(merged, file_json);
    }
    for (const auto& [key, raw_value] : overrides) {
        json value;
        try {
            value = json::parse(raw_value);
        } catch (const json::parse_error&) {
            value = raw_value;  // unquoted strings arrive verbatim
        }
        const auto dot = key.find('.');
        json patch;
        if (dot == std::string::npos) {
            patch = json{{key, value}};
        } else {
            patch = json{{key.substr(0, dot), json{{key.substr(dot + 1), value}}}};
        }
        merge(merged, patch);
    }
    return materialize(merged);
}

FluxModel make_flux(const FluxSection& flux) {
    if (flux.kind == "burgers") return builtin_flux("burgers");
    if (flux.kind == "linear") return builtin_flux("linear", {flux.speed});
    if (flux.kind == "polynomial") return builtin_flux("polynomial", flux.coefficients);
    throw std::invalid_argument("config: flux.kind must be burgers, linear, or "
                                "polynomial");
}

ProblemData make_problem(const RunConfig& config) {
    ProblemData problem;
    problem.mesh = build_mesh(config.mesh.nt, config.mesh.nx, config.domain.t_final,
                              config.domain.x_min, config.domain.x_max);
    problem.flux = make_flux(config.flux);
    const double uL = config.data.u_left;
    const double uR = config.data.u_right;
    if (config.data.u0_kind == "riemann") {
        problem.u0 = [uL, uR](double x) {
            if (x < 0.0) return uL;
            if (x > 0.0) return uR;
            return 0.5 * (uL + uR);
        };
    } else {
        const std::vector<double> coeffs = config.data.u0_coefficients;
        problem.u0 = [coeffs](double x) {
            double acc = 0.0;
            for (size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
            return acc;
        };
    }
    problem.u_left = [uL](double) { return uL; };
    problem.u_right = [uR](double) { return uR; };
    return problem;
}

DescentConfig make_descent_config(const DescentSection& descent) {
    DescentConfig config;
    config.max_iters = descent.max_iters;
    config.energy_tol = descent.energy_tol;
    config.grad_tol = descent.grad_tol;
    config.backtracking.enabled = descent.backtracking;
    config.backtracking.shrink = descent.shrink;
    config.backtracking.max_halvings = descent.max_halvings;
    config.record_every = descent.record_every;
    config.max_stored_iterates = descent.max_stored_iterates;
    config.solve_rel_tol = descent.solve_rel_tol;
    config.perturbation_epsilon = descent.perturbation_epsilon;
    config.pin_data_boundary = descent.pin_data_boundary;
    return config;
}

NodalField make_initial_iterate(const RunConfig& config, const ProblemData& problem) {
    if (config.descent.init == "data") {
        // Initial datum extended upward in time.
        NodalField u(problem.mesh);
        for (int i = 0; i <= problem.mesh.nt; ++i) {
            for (int j = 0; j <= problem.mesh.nx; ++j) {
                u(i, j) = problem.u0(problem.mesh.node_x(j));
            }
        }
        return u;
    }
    return NodalField(problem.mesh, 0.0);
}

bool is_riemann_problem(const RunConfig& config) {
    if (config.data.u0_kind != "riemann") return false;
    RiemannProblem problem{config.data.u_left, config.data.u_right,
                           make_flux(config.flux)};
    try {
        validate_convexity(problem);
    } catch (const std::invalid_argument&) {
        return false;
    }
    return true;
}

}  // namespace varcons::cli
