#pragma once

#include <iosfwd>

namespace tvdecomp {

/// Exit codes: 0 success, 1 usage error, 2 file error, 3 solver failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tvdecomp
