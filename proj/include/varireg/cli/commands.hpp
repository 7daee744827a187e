#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "varireg/common/error.hpp"

namespace varireg::cli {

// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kDefects = 1,
  kUsage = 2,  // usage, parse and I/O errors
  kNonFinite = 3,  // non-finite values or numerical breakdown
  kGradcheckFailed = 4,
  kConvergenceFailed = 5,
};

int exit_code_for(Errc code);

// Subcommands: info, metrics, gradcheck, register, remesh, converge.
int run(int argc, char** argv);
// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace varireg::cli
