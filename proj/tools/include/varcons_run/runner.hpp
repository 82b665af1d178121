#pragma once

#include <string>
#include <vector>

#include "varcons_run/config.hpp"

namespace varcons::cli {

// Parses `varcons <subcommand> --config <path> [--key value ...]`, runs the
// subcommand, and maps exceptions to the exit-code contract: 0 success,
// 1 configuration error, 2 numerical or I/O failure. Failed checks also
// return 2.
int run_main(int argc, char** argv);

// Individual subcommands, exposed for tests. Each returns 0 on success and
// 2 when a check fails; configuration problems throw std::invalid_argument.
int run_solve(const RunConfig& config);
int run_gradient_check(const RunConfig& config);
int run_oracle_check(const RunConfig& config);
int run_commutation_check(const RunConfig& config);
int run_entropy_sweep(const RunConfig& config);
int run_mesh_sweep(const RunConfig& config);
int run_ym_report(const RunConfig& config);

// Worker-thread cap for sweep subcommands: VARCONS_THREADS when set to a
// positive integer, otherwise the hardware concurrency (at least 1).
int sweep_thread_cap();

}  // namespace varcons::cli
