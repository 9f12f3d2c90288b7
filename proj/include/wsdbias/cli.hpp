#pragma once

#include <string>
#include <vector>

namespace wsdbias {

// Entry point for the command-line tool; argv excludes the program name.
// Exit status: 0 success, 1 usage error, 2 data error.
int run_command(const std::vector<std::string>& argv);

}  // namespace wsdbias
