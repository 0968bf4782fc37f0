#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace share {

/// Runs one `share` subcommand. `args` excludes the program name.
/// Returns the process exit status; failures print a single diagnostic line to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace share
