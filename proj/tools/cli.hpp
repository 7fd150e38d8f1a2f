#pragma once

#include <iosfwd>

namespace seqgpt::cli {

/// Runs one `seq-gpt` invocation. Data goes to `out`, diagnostics to `err`.
/// Exit codes: 0 success, 1 operational error, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace seqgpt::cli
