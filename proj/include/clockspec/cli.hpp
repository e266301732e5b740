#pragma once

// Command-line front end.  `run` takes the argument vector without the
// program name and returns the process exit code:
//   0  all gates passed
//   1  at least one gate failed (reports are still written)
//   2  configuration / usage error
//   3  numerical failure or unexpected error

#include <string>
#include <vector>

namespace clockspec::cli {

int run(std::vector<std::string> args);

}  // namespace clockspec::cli
