#pragma once

// Command-line front end, factored as a library call so tests can drive it
// in-process.  `args` excludes the program name.  Returns the process exit
// code: 0 success, 1 failed validation/internal error, 2 usage error,
// 3 size-guard violation, 4 data error.

#include <iostream>
#include <string>
#include <vector>

namespace dagsample {

int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
            std::ostream& err = std::cerr);

}  // namespace dagsample
