#pragma once

#include <iosfwd>

namespace soliton_forge::cli {

/// Exit codes: 0 ok, 2 configuration or measure error, 3 numerical failure,
/// 4 a verification check failed.
enum ExitCode { ok = 0, config_error = 2, numeric_error = 3, verification_failed = 4 };

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace soliton_forge::cli
