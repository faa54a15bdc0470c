#pragma once

#include <iosfwd>

namespace ptm {

/// Name of the environment variable holding the default part count.
inline constexpr const char* kThreadsEnv = "PTM_THREADS";

/// Entry point for the `ptm` tool. Returns 0 on success, 2 on a usage error
/// and 1 on a runtime error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ptm
