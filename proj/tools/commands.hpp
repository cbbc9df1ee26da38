#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kltensor::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
/// fit ran out of iterations before meeting the tolerance; outputs are
/// still written.
inline constexpr int kExitNotConverged = 2;

/// Runs the command line `args` (without the program name). Normal output
/// goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kltensor::cli
