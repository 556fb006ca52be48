#pragma once

#include <string>

namespace plantwin {

std::string read_file(const std::string& path);  // throws std::runtime_error

// Write-then-rename so partial runs never leave truncated files.
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace plantwin
