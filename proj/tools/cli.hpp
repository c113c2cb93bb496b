#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace icsad::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;
inline constexpr int kDataError = 3;
inline constexpr int kDetectorFailure = 4;

// Entry point of the `icsad` binary: simulate | detect | acf | eval | plot.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace icsad::cli
