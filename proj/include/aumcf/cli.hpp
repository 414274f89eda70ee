#pragma once

#include <iosfwd>

namespace aumcf {

/// Entry point of the `aumcf` command-line tool. Reports go to `out` (or the
/// --out file); failures print a one-line JSON error record to `err`.
/// Returns 0 on success, 2 for invalid input, 3 for numerical degeneracy and
/// 4 for configuration errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aumcf
