#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sqa::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kValidationFailure = 1;
inline constexpr int kUsageError = 2;

// Environment variable naming a default config file.
inline constexpr const char* kConfigEnv = "SQA_CONFIG";

// Runs one subcommand. args excludes the program name. Data goes to `out`
// (or files), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace sqa::cli
