#pragma once

#include <filesystem>

#include "pic/config.hpp"

namespace pic {

// Output directory resolution: config output.dir, then the PICTOOL_OUT
// environment variable, then ./out.
std::filesystem::path resolve_out_dir(const Config& cfg);

// Experiment commands. Each writes its CSV files under the resolved output
// directory and returns the process exit code. Configuration problems are
// reported by throwing ConfigError; run_cli maps that to exit code 2.
int cmd_uav(const Config& cfg);
int cmd_ugv(const Config& cfg);
int cmd_complexity(const Config& cfg);
int cmd_variance_sweep(const Config& cfg);
int cmd_coverage(const Config& cfg);

// Full argument parsing and dispatch for the pictool binary.
int run_cli(int argc, const char* const* argv);

}  // namespace pic
