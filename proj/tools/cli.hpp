#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ddtrsv::cli {

/// Version of the JSON report layout written by every command.
inline constexpr int schema_version = 1;

/// Runs the command line `args` (args[0] is the program name). Returns the
/// process exit code: 0 on success, 1 on a runtime error, 2 on a usage
/// error, 3 when a solve finishes without converging.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ddtrsv::cli
