// Microbenchmarks for the hot paths: stiffness assembly, the constrained
// conjugate-gradient solve, the full defect computation, one descent step,
// and the finite-volume reference solver. Run the varcons_bench binary
// directly; these are deliberately not part of the test suite.

#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "varcons/defect.hpp"
#include "varcons/descent.hpp"
#include "varcons/fem.hpp"
#include "varcons/flux.hpp"
#include "varcons/mesh.hpp"
#include "varcons/riemann.hpp"

namespace {

using namespace varcons;

// Standing-shock setup (Burgers, u = 1 on the left, -1 on the right) on the
// unit slab; the same configuration the solver tools default to.
ProblemData shock_problem(int n) {
    ProblemData problem;
    problem.flux = builtin_flux("burgers", {});
    problem.u0 = [](double x) { return x < 0.0 ? 1.0 : -1.0; };
    problem.u_left = [](double) { return 1.0; };
    problem.u_right = [](double) { return -1.0; };
    problem.mesh = build_mesh(n, n, 1.0, -1.0, 1.0);
    return problem;
}

// Smooth candidate field with the right boundary behavior, so the defect
// solve runs at the load level typical for mid-descent iterates.
NodalField smooth_candidate(const SpaceTimeMesh& mesh) {
    return interpolate_function(
        mesh, [](double, double x) { return -std::tanh(x / 0.2); });
}

void BM_AssembleStiffness(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const SpaceTimeMesh mesh = build_mesh(n, n, 1.0, -1.0, 1.0);
    for (auto _ : state) {
        SparseSpdSystem system = assemble_stiffness(mesh);
        benchmark::DoNotOptimize(system.matrix.val.data());
    }
    state.SetItemsProcessed(state.iterations() * mesh.num_elements());
}
BENCHMARK(BM_AssembleStiffness)->Arg(32)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_ConstrainedCgSolve(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const ProblemData problem = shock_problem(n);
    const DefectOperator op(problem);
    const NodalField u = smooth_candidate(problem.mesh);
    const std::vector<double> rhs = op.assemble_rhs(u);
    for (auto _ : state) {
        NodalField v = op.solve_constrained(rhs, kDefectRelTolDefault);
        benchmark::DoNotOptimize(v.values.data());
    }
    state.SetItemsProcessed(state.iterations() * problem.mesh.num_nodes());
}
BENCHMARK(BM_ConstrainedCgSolve)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

// Load assembly, CG solve, and the gradient projection together, i.e. the
// unit of work every descent iteration pays at least once.
void BM_DefectCompute(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const ProblemData problem = shock_problem(n);
    const DefectOperator op(problem);
    const NodalField u = smooth_candidate(problem.mesh);
    for (auto _ : state) {
        DefectSolution solution = op.compute(u);
        benchmark::DoNotOptimize(solution.energy);
        benchmark::DoNotOptimize(solution.gradient.values.data());
    }
    state.SetItemsProcessed(state.iterations() * problem.mesh.num_nodes());
}
BENCHMARK(BM_DefectCompute)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

// One full steepest-descent update from the zero start: defect, linearized
// defect, exact step, and the acceptance check. Tolerances are set so the
// loop never exits early.
void BM_DescentStep(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const ProblemData problem = shock_problem(n);
    const NodalField u_init(problem.mesh);
    DescentConfig config;
    config.max_iters = 1;
    config.energy_tol = 1e-300;
    config.grad_tol = 1e-300;
    config.record_every = 1;
    config.max_stored_iterates = 1;
    for (auto _ : state) {
        DescentResult result = descend(problem, u_init, config);
        benchmark::DoNotOptimize(result.field.values.data());
    }
    state.SetItemsProcessed(state.iterations() * problem.mesh.num_nodes());
}
BENCHMARK(BM_DescentStep)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_GodunovReference(benchmark::State& state) {
    const int nx = static_cast<int>(state.range(0));
    RiemannProblem riemann;
    riemann.u_left = -1.0;
    riemann.u_right = 1.0;
    riemann.flux = builtin_flux("burgers", {});
    const auto u0 = [](double x) { return x < 0.0 ? -1.0 : 1.0; };
    for (auto _ : state) {
        GodunovResult result = godunov_reference(riemann, u0, nx, 0.5, 0.9);
        benchmark::DoNotOptimize(result.states.back().data());
    }
    state.SetItemsProcessed(state.iterations() * nx);
}
BENCHMARK(BM_GodunovReference)->Arg(128)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
