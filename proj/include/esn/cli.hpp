#pragma once

#include <iosfwd>

namespace esn {

/// Exit codes: 0 pass, 1 violation found, 2 error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace esn
