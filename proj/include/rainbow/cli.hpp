#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rainbow {

// Exit codes: 0 found/verified, 1 no transversal (or certified absent),
// 2 invalid input or usage, 3 internal assertion failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace rainbow
