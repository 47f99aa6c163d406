#pragma once

#include <iosfwd>

#include "lfp/core/error.hpp"

namespace lfp {

// 0 success, 1 usage/config, 2 input/format, 3 numeric/backend/model.
int exit_code_for(ErrorCategory category) noexcept;

// Runs one subcommand. Diagnostics go to `err` as "ERROR:<category>:<message>".
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lfp
