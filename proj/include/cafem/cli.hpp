#pragma once

#include <iosfwd>
#include <string>

namespace cafem {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitInstability = 2 };

/// Entry point of the `cafem` tool with subcommands mesh, converge, simulate
/// and check. Output goes to `out`, diagnostics and usage to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Parses a mesh size given as a plain number or as "pi/N".
double parse_mesh_size(const std::string& text);

/// Thread count from CAFEM_THREADS (default 1; invalid values are rejected).
int threads_from_environment();

}  // namespace cafem
