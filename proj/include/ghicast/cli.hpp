#pragma once

#include <ostream>

namespace ghicast {

/// Runs the command-line front end. Returns the process exit code: 0 on
/// success, 1 for I/O failures, 2 for invalid input or configuration. Errors
/// are reported on `err` as one line, `error: <category>: <message>`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int exit_code_for(const char* category);

} // namespace ghicast
