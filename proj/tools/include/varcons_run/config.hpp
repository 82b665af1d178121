#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "varcons/defect.hpp"
#include "varcons/descent.hpp"
#include "varcons/flux.hpp"
#include "varcons/mesh.hpp"

namespace varcons::cli {

// Run configuration mirroring the module knobs. The file format is a JSON
// object with one level of nesting ({"mesh": {"nt": 64}, ...}); command-line
// --section.key value pairs override file values. Every key is validated;
// unknown keys are rejected so typos fail loudly.
struct MeshSection {
    int nt = 64;
    int nx = 64;
};

struct DomainSection {
    double t_final = 1.0;
    double x_min = -1.0;
    double x_max = 1.0;
};

struct FluxSection {
    std::string kind = "burgers";  // burgers | linear | polynomial
    double speed = 1.0;            // linear only
    std::vector<double> coefficients;  // polynomial only, constant term first
};

struct DataSection {
    double u_left = 1.0;
    double u_right = -1.0;
    // Initial datum: "riemann" is the step between u_left and u_right at
    // x = 0; "polynomial" evaluates u0_coefficients in x.
    std::string u0_kind = "riemann";
    std::vector<double> u0_coefficients;
};

struct DescentSection {
    int max_iters = 200;
    double energy_tol = 1e-12;
    double grad_tol = 1e-10;
    bool backtracking = true;
    double shrink = 0.5;
    int max_halvings = 30;
    int record_every = 10;
    int max_stored_iterates = 200;
    double solve_rel_tol = 1e-10;
    double perturbation_epsilon = 0.0;
    bool pin_data_boundary = false;
    std::string init = "zero";  // starting iterate: zero | data
};

struct EntropySection {
    std::vector<double> epsilons = {0.2, 0.1, 0.05};
    double newton_tol = 1e-8;
    int newton_max_iters = 50;
    double bump_center_t = 0.5;
    double bump_center_x = 0.0;
    double bump_radius_t = 0.4;
    double bump_radius_x = 0.4;
};

struct YmSection {
    int bins = 3;
    int coarsen = 4;
    double z_min = -1.5;
    double z_max = 1.5;
    double tail_fraction = 0.5;  // share of the stored iterates fed to the measure
    double e_factor = 1e-4;
    double increment_factor = 1e-3;
    double gradient_factor = 1e-3;
};

struct ChecksSection {
    double gradient_tol = 1e-5;
    int gradient_pairs = 10;
    double gradient_fd_step = 1e-4;
    double oracle_tol = 1e-10;
    double cross_oracle_tol = 0.05;
    std::vector<int> mesh_sizes = {16, 32, 64};
    int godunov_cells = 512;
    double godunov_cfl = 0.9;
};

struct OutputSection {
    std::string directory = "out";
};

struct RunConfig {
    MeshSection mesh;
    DomainSection domain;
    FluxSection flux;
    DataSection data;
    DescentSection descent;
    EntropySection entropy;
    YmSection ym;
    ChecksSection checks;
    OutputSection output;
    std::uint64_t seed = 12345;
};

// Loads a config file (JSON object, one nesting level) and applies
// "section.key" / "key" overrides in order. An empty path yields defaults
// plus overrides. Throws std::invalid_argument on unknown keys, type
// mismatches, or unreadable files.
RunConfig load_config(const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>& overrides);

// Materialize core-library inputs from the config.
FluxModel make_flux(const FluxSection& flux);
ProblemData make_problem(const RunConfig& config);
DescentConfig make_descent_config(const DescentSection& descent);
NodalField make_initial_iterate(const RunConfig& config, const ProblemData& problem);

// True when the configured data describe a Riemann problem with convex flux,
// i.e. when exact-solution comparisons are meaningful.
bool is_riemann_problem(const RunConfig& config);

}  // namespace varcons::cli
