#pragma once

#include <iosfwd>
#include <string>

#include "cavpa/config.hpp"

namespace cavpa::scenarios {

// Each scenario validates its inputs, runs, writes its files and returns the
// process exit code: 0 success, 1 physics/convergence failure.
int run_params(const RunConfig& cfg, std::ostream& out);
int run_simulate(const RunConfig& cfg, std::ostream& out);
int run_delta(const RunConfig& cfg, std::ostream& out);
int run_optimize(const RunConfig& cfg, std::ostream& out);
int run_scan(const RunConfig& cfg, std::ostream& out);
int run_collective(const RunConfig& cfg, std::ostream& out);
int run_validate(const RunConfig& cfg, std::ostream& out);

// Dispatch by scenario name; throws ConfigError for unknown names.
int run_scenario(const std::string& name, const RunConfig& cfg, std::ostream& out);

}  // namespace cavpa::scenarios
