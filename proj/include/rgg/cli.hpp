// Command-line front end: xi, radius, integral, simulate, analyze.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rgg::cli {

/// Runs one command. `args` excludes the program name. Returns the process
/// exit code; output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses a count that may be written in scientific notation ("1e8"),
/// truncating toward zero.
double parse_count(const std::string& text);

/// `%.12g` formatting used for every printed number.
std::string format12(double v);

}  // namespace rgg::cli
