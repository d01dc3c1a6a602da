#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace meanratio::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kValidationFailure = 2,
  kGateRefusal = 3,
  kCertificateViolation = 4,
};

/// Runs one command line (without the program name). Reports go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace meanratio::cli
