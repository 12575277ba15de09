#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace urank::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Runs one command line (without the program name). Results go to files;
/// `out` receives short status text and JSON when no output file is given,
/// `err` receives one-line error messages.
///
/// Subcommands: risk, decompose, complexity, erm,
/// experiment {wn-decay, variance, rate, coverage}, replay.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace urank::cli
