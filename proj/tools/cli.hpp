#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace blockmix::cli {

enum ExitCode : int {
  kOk = 0,
  kMaxSweeps = 2,
  kUsage = 64,
  kDataError = 65,
  kNoInput = 66,
  kInternal = 70,
  kCantCreate = 73,
};

// Runs one command line (without the program name) and returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string sha256_hex(const std::string& bytes);

}  // namespace blockmix::cli
