#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace frameless::cli {

enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kUsage = 2,
  kNumericDegeneracy = 3,
  kOracleFailure = 4,
};

/// Environment variable naming the directory for relative --output paths.
inline constexpr const char* kOutputDirEnv = "FRAMELESS_OUTPUT_DIR";

/// Runs one command line (without the program name). Results go to `out`
/// unless --output is given; error records go to `err` as one JSON line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Fixed 12-significant-digit rendering used for every emitted number.
std::string format_number(double x);

}  // namespace frameless::cli
