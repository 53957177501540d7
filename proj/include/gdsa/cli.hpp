// Command-line front end: run, verify, sweep and oracle subcommands.
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gdsa {

/// Exit codes: 0 success, 1 verification failure or non-finite iterate,
/// 2 malformed config or parameter range violation.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace gdsa
