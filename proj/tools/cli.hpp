#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bsea::cli {

enum ExitCode : int {
  ok = 0,
  internal_error = 1,
  usage_error = 2,
  data_error = 3,
  no_key_found = 4,
};

/// Runs one command line (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bsea::cli
