#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace infoflow {

enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitNumerical = 2 };

// Entry point of the `infoflow` binary. Subcommands: grid, defactor,
// rolling, synth. Returns the process exit status.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

// 64-bit FNV-1a digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::string& path);

}  // namespace infoflow
