#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "scurv/io.hpp"

namespace scurv {

/// Fully resolved invocation: command, parameters after defaults, flags and
/// `--config` overrides, and output targets.
struct ExperimentConfig {
  std::string command;
  json params;
  std::string output;  // report path; empty writes to the output stream
  std::string csv;     // optional table path
};

struct RunOutcome {
  int exit_code = 0;
  json report;
  std::vector<std::string> csv_header;
  std::vector<std::vector<double>> csv_rows;
};

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitUsage = 2, kExitNumeric = 3 };

std::vector<std::string> command_names();

/// Default parameters of a command; throws PreconditionError for unknown commands.
json default_params(const std::string& command);

/// Runs a command without touching the file system except to read inputs.
RunOutcome execute(const ExperimentConfig& config);

/// Runs a command, writes the report and table, maps errors to exit codes.
int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Parses argv into a config, or returns the exit code of a help/usage outcome.
struct ParsedArgs {
  ExperimentConfig config;
  bool done = false;  // help printed or usage error reported
  int exit_code = 0;
};

ParsedArgs parse_command_line(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int cli_main(int argc, const char* const* argv);

}  // namespace scurv
