#pragma once

#include <ostream>

namespace hlnet::cli {

// Parses the command line and runs one command. Data goes to `out`,
// diagnostics to `err`. Returns 0 on success, 1 when the run fails and 2 on a
// usage or configuration error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hlnet::cli
