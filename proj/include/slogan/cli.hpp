#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace slogan::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNothingFlagged = 2;

// Default output directory when --out is not given.
inline constexpr const char* kOutDirEnv = "SLOGAN_OUT_DIR";

// Runs the command line `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Hex SHA-256 of a file's bytes.
std::string file_sha256(const std::string& path);

}  // namespace slogan::cli
