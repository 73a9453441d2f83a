#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dig::cli {

/// Runs one command line (without the program name). Results go to `out`,
/// structured JSON errors to `err`. Returns 0 on success, 1 on numerical or
/// internal errors and 2 on validation or usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dig::cli
