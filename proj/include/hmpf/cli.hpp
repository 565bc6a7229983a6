#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hmpf {

// Runs one `hmpf` invocation. `args` excludes the program name. Failures are
// reported on `err` as a single line "error: <category>: <message>" and the
// category's exit code is returned; success returns 0.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hmpf
