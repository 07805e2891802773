#pragma once

#include "pwsde/config.hpp"

#include <exception>
#include <iosfwd>
#include <string>
#include <vector>

namespace pwsde {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitModel = 3,
    kExitNumeric = 4,
};

struct RunResult {
    int exit_code = kExitOk;
    std::vector<std::string> files;
};

/// Executes one experiment, writing CSVs (and a `.transform.txt` sidecar
/// when a transform is built) under the config's output prefix. Summary lines
/// go to `out`, errors to `err`; library exceptions map to exit codes.
RunResult run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Prints the error and returns its exit code: config and argument errors 2,
/// model violations 3, anything else 4.
int report_error(const std::exception& e, std::ostream& err);

/// `out` without a trailing `.csv`, or `<command>_<problem>` when empty.
std::string output_prefix(const ExperimentConfig& config);

}  // namespace pwsde
