#pragma once

#include <iosfwd>
#include <string>

#include "run_config.hpp"

namespace copo::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitAboveThreshold = 2,
  kExitVerifyFailed = 3,
};

/// Per-frequency correlation table, one block of rows per series.
int cmd_spectrum(const RunConfig& c, std::ostream& out);
/// Threshold map over the (J_a, J_b) grid.
int cmd_stability(const RunConfig& c, std::ostream& out);
/// Optimal local-oscillator angle per series.
int cmd_optimize_angle(const RunConfig& c, std::ostream& out);
/// Stochastic-simulation oracle against the linearized spectra.
int cmd_verify(const RunConfig& c, std::ostream& out);
/// Raw trajectory dump; files are written next to `prefix`.
int cmd_sde_dump(const RunConfig& c, const std::string& prefix, std::ostream& out);

/// Full command-line entry point. Errors go to `err`; nothing is written to
/// the process streams directly, so tests can run it in-process.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Locale-independent shortest round-trip formatting.
std::string format_number(double v);

}  // namespace copo::cli
