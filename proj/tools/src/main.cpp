#include "varcons_run/runner.hpp"

int main(int argc, char** argv) { return varcons::cli::run_main(argc, argv); }
