#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hexflood::cli {

// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,    // bad flags or scenario config
  kNetwork = 3,  // elevation provider failed and nothing was cached
  kData = 4,     // unreadable or inconsistent terrain data
  kIo = 5,       // output could not be written
};

// Entry point for the hexflood tool. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hexflood::cli
