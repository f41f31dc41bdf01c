#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gptrap::cli {

inline constexpr int schema_version = 1;

enum ExitCode { exit_ok = 0, exit_internal = 1, exit_validation = 2, exit_solver = 3, exit_io = 4 };

/// Runs the command line `args` (without the program name). Results go to
/// the --out file (or `out` when none is given); error records go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses a flat `key = value` config file ('#' starts a comment). A JSON
/// result file is also accepted, in which case its reproducibility config
/// is used. Keys are returned in file order.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path);

}  // namespace gptrap::cli
