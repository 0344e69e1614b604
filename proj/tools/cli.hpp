#pragma once

#include <string>
#include <vector>

namespace sparselab::cli {

// Exit codes: 0 = run passed, 1 = run completed but an invariant failed,
// 2 = usage/configuration error (bad flags, infeasible parameters).
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args); // args without the program name

} // namespace sparselab::cli
