#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace facetlm::cli {

/// Runs `facetlm <args...>` (args excludes the program name) and returns the
/// exit status: 0 success, 1 usage or evaluation error, 2 I/O or format error.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

/// The default lambda grid for `sweep --param lambda`.
std::vector<double> default_lambda_grid();

}  // namespace facetlm::cli
