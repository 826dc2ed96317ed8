#pragma once

#include <string>
#include <vector>

namespace deft::cli {

// Entry point shared by the binary and the tests. Returns the process exit
// code: 0 success, 2 usage/configuration errors, 3 data mismatches.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace deft::cli
