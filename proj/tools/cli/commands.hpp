#pragma once

#include <iosfwd>

#include "config.hpp"

namespace holoflow::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitConfigError = 2,
  kExitNumericalAbort = 3,
};

// Each command writes into config.output and returns an exit code. Config
// problems surface as exceptions and are mapped by run().
int cmd_portrait(const RunConfig& config, std::ostream& log);
int cmd_surface(const RunConfig& config, std::ostream& log);
int cmd_orbit_study(const RunConfig& config, std::ostream& log);
int cmd_verify(const RunConfig& config, std::ostream& log);

/// True for errors caused by the input rather than by the numerics.
bool is_config_error(const std::exception& e);

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace holoflow::cli
