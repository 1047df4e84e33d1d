#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace safe_el {

// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitSafetyViolation = 1,
  kExitConfigError = 2,
  kExitInfeasible = 3,
};

// Subcommands: run, validate, certify-plant, qp-fuzz, presets.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace safe_el
