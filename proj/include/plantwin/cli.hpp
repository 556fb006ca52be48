#pragma once

#include <string>
#include <vector>

namespace plantwin {

// Operator entry point; returns the process exit status. Split out from
// main() so tests can drive the full command surface in-process.
int run_command(const std::vector<std::string>& args);

}  // namespace plantwin
