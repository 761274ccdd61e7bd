#pragma once
// Command-line front end. Kept as a library entry point so the dispatch,
// exit codes, and output formats are directly testable.
//
// Exit codes: 0 success, 2 usage error, 3 input validation failure,
// 4 runtime failure. Every failure prints a one-line machine-parsable
// reason to the error stream: "error: code=<n> kind=<k> msg=<text>".

#include <iosfwd>
#include <string>
#include <vector>

namespace dbmatch::cli {

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dbmatch::cli
