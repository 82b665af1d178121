#include "varcons_run/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <thread>

#include "json.hpp"
#include "varcons/defect.hpp"
#include "varcons/descent.hpp"
#include "varcons/entropy.hpp"
#include "varcons/errors.hpp"
#include "varcons/flux.hpp"
#include "varcons/riemann.hpp"
#include "varcons/ym.hpp"
#include "varcons_run/artifacts.hpp"
#include "varcons_run/oracles.hpp"

namespace varcons::cli {

namespace {

using nlohmann::ordered_json;

std::string join_path(const std::string& dir, const std::string& name) {
    if (dir.empty()) return name;
    if (dir.back() == '/') return dir + name;
    return dir + "/" + name;
}

RiemannProblem riemann_of(const RunConfig& config) {
    return RiemannProblem{config.data.u_left, config.data.u_right,
                          make_flux(config.flux)};
}

void write_json(const std::string& path, const ordered_json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// Runs fn(i) for i in [0, count) on up to sweep_thread_cap() workers.
// Exceptions are captured per index and the lowest-index one is rethrown
// after all workers join, so failures are deterministic.
void parallel_for_index(size_t count, const std::function<void(size_t)>& fn) {
    const size_t workers =
        std::min<size_t>(static_cast<size_t>(sweep_thread_cap()), std::max<size_t>(count, 1));
    if (workers <= 1) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& err : errors) {
        if (err) std::rethrow_exception(err);
    }
}

}  // namespace

int sweep_thread_cap() {
    if (const char* raw = std::getenv("VARCONS_THREADS")) {
        char* end = nullptr;
        const long parsed = std::strtol(raw, &end, 10);
        if (end != raw && *end == '\0' && parsed > 0) return static_cast<int>(parsed);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

int run_solve(const RunConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    const ProblemData problem = make_problem(config);
    const NodalField u_init = make_initial_iterate(config, problem);
    const DescentConfig descent_config = make_descent_config(config.descent);

    const DescentResult result = descend(problem, u_init, descent_config);
    const DefectSolution final_defect =
        compute_defect(problem, result.field, config.descent.solve_rel_tol);

    ensure_directory(config.output.directory);
    const std::string dir = config.output.directory;
    write_history_csv(join_path(dir, "history.csv"), result.history);
    write_field_csv(join_path(dir, "field_final.csv"), result.field, "u");
    write_field_csv(join_path(dir, "defect_final.csv"), final_defect.v, "v");
    write_heatmap_pgm(join_path(dir, "heatmap.pgm"), result.field);

    ordered_json summary;
    summary["status"] = to_string(result.history.status);
    summary["iterations"] = result.history.records.back().index;
    summary["final_energy"] = result.history.records.back().energy;
    summary["final_defect_energy"] = final_defect.energy;
    summary["final_gradient_norm"] = result.history.records.back().gradient_norm;

    if (is_riemann_problem(config)) {
        const RiemannProblem rp = riemann_of(config);
        const SpaceTimeMesh& mesh = problem.mesh;
        std::vector<double> exact(static_cast<size_t>(mesh.num_nodes()), 0.0);
        for (int i = 0; i <= mesh.nt; ++i) {
            for (int j = 0; j <= mesh.nx; ++j) {
                exact[static_cast<size_t>(mesh.node_index(i, j))] =
                    exact_riemann(rp, mesh.node_t(i), mesh.node_x(j));
            }
        }
        write_comparison_csv(join_path(dir, "comparison.csv"), result.field, exact);
        summary["l2_error"] = l2_error_vs_exact(result.field, rp, 0.0);
        summary["l2_error_banded"] = l2_error_vs_exact(result.field, rp, 3.0 * mesh.dx());
    }

    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    summary["wall_time_seconds"] = elapsed.count();
    write_json(join_path(dir, "run_summary.json"), summary);

    std::cout << "solve: " << to_string(result.history.status)
              << " after " << result.history.records.back().index << " iterations, E = "
              << format_double(result.history.records.back().energy) << "\n";
    return 0;
}

int run_gradient_check(const RunConfig& config) {
    const ProblemData problem = make_problem(config);
    const double h = config.checks.gradient_fd_step;
    const double tol = config.checks.gradient_tol;
    // Check solves run tighter than the descent default so CG truncation
    // stays well below the finite-difference error being measured.
    const double rel_tol = std::min(config.descent.solve_rel_tol, 1e-12);

    DefectOperator op(problem);
    double worst = 0.0;
    bool pass = true;
    for (int p = 0; p < config.checks.gradient_pairs; ++p) {
        const NodalField u = random_field(problem.mesh, config.seed + 2 * static_cast<std::uint64_t>(p));
        const NodalField w =
            random_field(problem.mesh, config.seed + 2 * static_cast<std::uint64_t>(p) + 1);
        const double dd = op.directional_derivative(u, w, rel_tol);

        NodalField up(problem.mesh);
        NodalField um(problem.mesh);
        for (size_t a = 0; a < u.values.size(); ++a) {
            up.values[a] = u.values[a] + h * w.values[a];
            um.values[a] = u.values[a] - h * w.values[a];
        }
        const double e_plus = op.compute(up, rel_tol).energy;
        const double e_minus = op.compute(um, rel_tol).energy;
        const double fd = (e_plus - e_minus) / (2.0 * h);
        const double rel = std::abs(dd - fd) / std::max(std::abs(dd), 1e-12);
        worst = std::max(worst, rel);
        const bool ok = rel <= tol;
        pass = pass && ok;
        std::cout << "gradient-check pair " << p << ": dd = " << format_double(dd)
                  << ", fd = " << format_double(fd) << ", rel = " << format_double(rel)
                  << (ok ? " PASS" : " FAIL") << "\n";
    }
    std::cout << "gradient-check: worst rel = " << format_double(worst) << " vs tol "
              << format_double(tol) << (pass ? " PASS" : " FAIL") << "\n";
    return pass ? 0 : 2;
}

int run_oracle_check(const RunConfig& config) {
    bool pass = true;

    // Dense equivalence on a fixed small mesh; the dense reference is
    // O(n^3) so the size stays independent of the configured mesh.
    RunConfig small = config;
    small.mesh.nt = 8;
    small.mesh.nx = 8;
    const ProblemData problem = make_problem(small);
    const NodalField u = random_field(problem.mesh, config.seed);
    const double dense_err = defect_vs_dense_error(problem, u, 1e-13);
    const bool dense_ok = dense_err <= config.checks.oracle_tol;
    pass = pass && dense_ok;
    std::cout << "oracle-check dense 8x8: rel H1 err = " << format_double(dense_err)
              << " vs tol " << format_double(config.checks.oracle_tol)
              << (dense_ok ? " PASS" : " FAIL") << "\n";

    std::vector<double> matrix = dense_stiffness(problem.mesh);
    std::vector<double> zero(static_cast<size_t>(problem.mesh.num_nodes()), 0.0);
    dense_apply_final_time_constraint(problem.mesh, matrix, zero);
    const bool spd_ok = dense_is_spd(matrix, problem.mesh.num_nodes());
    pass = pass && spd_ok;
    std::cout << "oracle-check constrained matrix SPD: " << (spd_ok ? "PASS" : "FAIL")
              << "\n";

    if (is_riemann_problem(config)) {
        const RiemannProblem rp = riemann_of(config);
        const GodunovResult ref = godunov_reference(
            rp, [&rp](double x) { return x < 0.0 ? rp.u_left : x > 0.0 ? rp.u_right
                                  : 0.5 * (rp.u_left + rp.u_right); },
            config.checks.godunov_cells, config.domain.t_final,
            config.checks.godunov_cfl, config.domain.x_min, config.domain.x_max);
        const std::vector<double>& final_row = ref.states.back();
        const double t_final = ref.times.back();
        const double dx = ref.x_centers[1] - ref.x_centers[0];
        double l1 = 0.0;
        for (size_t c = 0; c < final_row.size(); ++c) {
            l1 += std::abs(final_row[c] - exact_riemann(rp, t_final, ref.x_centers[c])) * dx;
        }
        const bool godunov_ok = l1 <= config.checks.cross_oracle_tol;
        pass = pass && godunov_ok;
        std::cout << "oracle-check godunov vs exact (" << config.checks.godunov_cells
                  << " cells): L1 = " << format_double(l1) << " vs tol "
                  << format_double(config.checks.cross_oracle_tol)
                  << (godunov_ok ? " PASS" : " FAIL") << "\n";
    } else {
        std::cout << "oracle-check godunov vs exact: SKIP (initial data is not a "
                     "convex-flux Riemann problem)\n";
    }
    return pass ? 0 : 2;
}

int run_commutation_check(const RunConfig& config) {
    (void)config;
    bool pass = true;
    const double tol = 1e-12;

    {
        // Any scalar law commutes with itself: 1x1 Jacobians always commute.
        SystemFlux scalar;
        scalar.state_dim = 1;
        scalar.space_dim = 2;
        scalar.jacobian = [](int j, const std::vector<double>& u) {
            return std::vector<double>{j == 0 ? u[0] : 0.5 * u[0] * u[0]};
        };
        const CommutationReport report =
            check_commutation(scalar, {{0.3}, {-0.7}, {1.2}}, tol);
        const bool ok = report.commutes && report.max_residual == 0.0;
        pass = pass && ok;
        std::cout << "commutation-check scalar: residual = "
                  << format_double(report.max_residual) << (ok ? " PASS" : " FAIL")
                  << "\n";
    }
    {
        // Constant anticommuting pair; the commutator has Frobenius norm
        // 2*sqrt(2) at every state, so the verdict must be false.
        SystemFlux anti;
        anti.state_dim = 2;
        anti.space_dim = 2;
        anti.jacobian = [](int j, const std::vector<double>&) {
            if (j == 0) return std::vector<double>{1.0, 0.0, 0.0, -1.0};
            return std::vector<double>{0.0, 1.0, 1.0, 0.0};
        };
        const CommutationReport report =
            check_commutation(anti, {{0.0, 0.0}, {0.4, -1.1}}, tol);
        const double expected = 2.0 * std::sqrt(2.0);
        const bool ok = !report.commutes &&
                        std::abs(report.max_residual - expected) <= 1e-12;
        pass = pass && ok;
        std::cout << "commutation-check anticommuting: residual = "
                  << format_double(report.max_residual) << " (expected "
                  << format_double(expected) << ", verdict "
                  << (report.commutes ? "true" : "false") << ")"
                  << (ok ? " PASS" : " FAIL") << "\n";
    }
    {
        // State-dependent diagonal Jacobians commute entrywise.
        SystemFlux diag;
        diag.state_dim = 2;
        diag.space_dim = 2;
        diag.jacobian = [](int j, const std::vector<double>& u) {
            if (j == 0) return std::vector<double>{u[0], 0.0, 0.0, u[1]};
            return std::vector<double>{u[1], 0.0, 0.0, u[0] * u[0]};
        };
        const CommutationReport report =
            check_commutation(diag, {{0.5, -0.3}, {1.1, 0.2}, {-0.8, 0.9}}, tol);
        const bool ok = report.commutes;
        pass = pass && ok;
        std::cout << "commutation-check diagonal: residual = "
                  << format_double(report.max_residual)
                  << (ok ? " PASS" : " FAIL") << "\n";
    }
    std::cout << "commutation-check: " << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : 2;
}

int run_entropy_sweep(const RunConfig& config) {
    const ProblemData problem = make_problem(config);
    const std::vector<double>& epsilons = config.entropy.epsilons;
    if (epsilons.empty()) throw std::invalid_argument("config: entropy.epsilons is empty");

    struct Row {
        double epsilon = 0.0;
        double energy = 0.0;
        double perturbed = 0.0;
        double discrepancy = 0.0;
    };
    std::vector<Row> rows(epsilons.size());

    parallel_for_index(epsilons.size(), [&](size_t i) {
        const double eps = epsilons[i];
        const NodalField u_eps = viscous_newton_solve(
            problem, eps, config.entropy.newton_tol, config.entropy.newton_max_iters);
        const double rel_tol = config.descent.solve_rel_tol;
        rows[i].epsilon = eps;
        rows[i].energy = compute_defect(problem, u_eps, rel_tol).energy;
        rows[i].perturbed = perturbed_energy(problem, u_eps, eps, rel_tol);
        rows[i].discrepancy = defect_proportionality_check(problem, u_eps, eps, rel_tol);
    });

    ensure_directory(config.output.directory);
    std::vector<CsvRow> csv_rows;
    csv_rows.reserve(rows.size());
    for (const Row& row : rows) {
        csv_rows.push_back({format_double(row.epsilon), format_double(row.energy),
                            format_double(row.perturbed),
                            format_double(row.discrepancy)});
        std::cout << "entropy-sweep eps = " << format_double(row.epsilon)
                  << ": E = " << format_double(row.energy)
                  << ", perturbed_E = " << format_double(row.perturbed)
                  << ", proportionality = " << format_double(row.discrepancy) << "\n";
    }
    write_csv(join_path(config.output.directory, "entropy_sweep.csv"),
              {"epsilon", "E", "perturbed_E", "proportionality_discrepancy"}, csv_rows);
    return 0;
}

int run_mesh_sweep(const RunConfig& config) {
    if (!is_riemann_problem(config)) {
        throw std::invalid_argument(
            "mesh-sweep requires convex-flux Riemann data (exact solution needed)");
    }
    const RiemannProblem rp = riemann_of(config);
    const std::vector<int>& sizes = config.checks.mesh_sizes;
    if (sizes.size() < 2) {
        throw std::invalid_argument("config: checks.mesh_sizes needs at least 2 sizes");
    }
    for (int n : sizes) {
        if (n < 2) throw std::invalid_argument("config: checks.mesh_sizes entries must be >= 2");
    }

    std::vector<double> energies(sizes.size(), 0.0);
    parallel_for_index(sizes.size(), [&](size_t i) {
        RunConfig local = config;
        local.mesh.nt = sizes[i];
        local.mesh.nx = sizes[i];
        const ProblemData problem = make_problem(local);
        const NodalField u = interpolate_function(
            problem.mesh, [&rp](double t, double x) { return exact_riemann(rp, t, x); });
        energies[i] = compute_defect(problem, u, config.descent.solve_rel_tol).energy;
    });

    bool decreasing = true;
    std::vector<CsvRow> csv_rows;
    for (size_t i = 0; i < sizes.size(); ++i) {
        csv_rows.push_back({std::to_string(sizes[i]), format_double(energies[i])});
        std::cout << "mesh-sweep n = " << sizes[i] << ": E = "
                  << format_double(energies[i]) << "\n";
        if (i > 0 && !(energies[i] < energies[i - 1])) decreasing = false;
    }
    ensure_directory(config.output.directory);
    write_csv(join_path(config.output.directory, "mesh_sweep.csv"), {"n", "E"}, csv_rows);
    std::cout << "mesh-sweep: interpolant energy "
              << (decreasing ? "strictly decreasing PASS" : "not decreasing FAIL") << "\n";
    return decreasing ? 0 : 2;
}

int run_ym_report(const RunConfig& config) {
    const ProblemData problem = make_problem(config);
    const NodalField u_init = make_initial_iterate(config, problem);
    const DescentConfig descent_config = make_descent_config(config.descent);
    const DescentResult result = descend(problem, u_init, descent_config);

    if (result.iterates.empty()) {
        throw std::invalid_argument("ym-report: no stored iterates (check "
                                    "descent.max_stored_iterates)");
    }
    const size_t stored = result.iterates.size();
    const size_t tail = std::max<size_t>(
        1, static_cast<size_t>(std::ceil(config.ym.tail_fraction * static_cast<double>(stored))));
    const std::vector<NodalField> window(result.iterates.end() - static_cast<long>(tail),
                                         result.iterates.end());

    const EmpiricalYoungMeasure measure = empirical_measure(
        window, config.ym.coarsen, config.ym.z_min, config.ym.z_max, config.ym.bins);
    const MeasureMoments moments = measure_moments(measure, problem.flux);
    const double averaged_energy =
        averaged_defect_energy(problem, moments, config.descent.solve_rel_tol);

    ClassifierThresholds thresholds;
    thresholds.e_factor = config.ym.e_factor;
    thresholds.increment_factor = config.ym.increment_factor;
    thresholds.gradient_factor = config.ym.gradient_factor;
    const RunReport report = classify_run(result.history, result.iterates, thresholds);

    ensure_directory(config.output.directory);
    const std::string dir = config.output.directory;

    std::vector<CsvRow> measure_rows;
    for (int ci = 0; ci < measure.cells_t; ++ci) {
        for (int cj = 0; cj < measure.cells_x; ++cj) {
            const double* weights = measure.cell_weights(ci * measure.cells_x + cj);
            for (int b = 0; b < measure.bins; ++b) {
                measure_rows.push_back({std::to_string(ci), std::to_string(cj),
                                        format_double(measure.bin_center(b)),
                                        format_double(weights[b])});
            }
        }
    }
    write_csv(join_path(dir, "measure.csv"), {"cell_t", "cell_x", "bin_center", "weight"},
              measure_rows);

    std::vector<CsvRow> moment_rows;
    const SpaceTimeMesh& mesh = problem.mesh;
    for (int i = 0; i <= mesh.nt; ++i) {
        for (int j = 0; j <= mesh.nx; ++j) {
            moment_rows.push_back({format_double(mesh.node_t(i)),
                                   format_double(mesh.node_x(j)),
                                   format_double(moments.u_bar(i, j)),
                                   format_double(moments.f_bar(i, j))});
        }
    }
    write_csv(join_path(dir, "moments.csv"), {"t", "x", "u_bar", "f_bar"}, moment_rows);

    ordered_json summary;
    summary["label"] = to_string(report.label);
    summary["status"] = to_string(result.history.status);
    summary["e_initial"] = report.e_initial;
    summary["e_final"] = report.e_final;
    summary["e_trend"] = report.e_trend;
    summary["gradient_trend"] = report.gradient_trend;
    summary["increment_trend"] = report.increment_trend;
    summary["e_small"] = report.e_small;
    summary["gradient_small"] = report.gradient_small;
    summary["increments_small"] = report.increments_small;
    summary["averaged_defect_energy"] = averaged_energy;
    summary["window_iterates"] = tail;
    summary["clamped_samples"] = measure.clamped_samples;
    summary["total_samples"] = measure.total_samples;
    write_json(join_path(dir, "ym_summary.json"), summary);

    std::cout << "ym-report: label = " << to_string(report.label)
              << ", averaged defect energy = " << format_double(averaged_energy)
              << ", clamped " << measure.clamped_samples << "/" << measure.total_samples
              << " samples\n";
    return 0;
}

namespace {

int dispatch(const std::string& subcommand, const RunConfig& config) {
    if (subcommand == "solve") return run_solve(config);
    if (subcommand == "gradient-check") return run_gradient_check(config);
    if (subcommand == "oracle-check") return run_oracle_check(config);
    if (subcommand == "commutation-check") return run_commutation_check(config);
    if (subcommand == "entropy-sweep") return run_entropy_sweep(config);
    if (subcommand == "mesh-sweep") return run_mesh_sweep(config);
    if (subcommand == "ym-report") return run_ym_report(config);
    throw std::invalid_argument("unknown subcommand '" + subcommand + "'");
}

const char* kUsage =
    "usage: varcons <subcommand> --config <path> [--key value ...]\n"
    "subcommands: solve gradient-check oracle-check commutation-check\n"
    "             entropy-sweep mesh-sweep ym-report\n"
    "Override any config entry with --section.key value (e.g. --mesh.nt 128).\n";

}  // namespace

int run_main(int argc, char** argv) {
    try {
        if (argc < 2) {
            std::cerr << kUsage;
            return 1;
        }
        const std::string subcommand = argv[1];
        if (subcommand == "--help" || subcommand == "-h" || subcommand == "help") {
            std::cout << kUsage;
            return 0;
        }
        std::string config_path;
        std::vector<std::pair<std::string, std::string>> overrides;
        for (int i = 2; i < argc; ++i) {
            std::string key = argv[i];
            if (key.rfind("--", 0) != 0) {
                throw std::invalid_argument("expected --key, got '" + key + "'");
            }
            key = key.substr(2);
            if (i + 1 >= argc) {
                throw std::invalid_argument("missing value for --" + key);
            }
            const std::string value = argv[++i];
            if (key == "config") {
                config_path = value;
            } else {
                overrides.emplace_back(key, value);
            }
        }
        const RunConfig config = load_config(config_path, overrides);
        return dispatch(subcommand, config);
    } catch (const std::invalid_argument& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
}

}  // namespace varcons::cli
