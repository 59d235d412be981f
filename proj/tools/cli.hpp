#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace simulst::cli {

// Exit codes of the simulst tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1; // bad arguments, unreadable or malformed inputs
inline constexpr int kExitBackend = 2; // backend failure or protocol violation

/// Runs the tool with argv-style arguments (args[0] is the program name).
/// Errors are reported on `err` as a single JSON line.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace simulst::cli
