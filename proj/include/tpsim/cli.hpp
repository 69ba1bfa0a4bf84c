// Command-line entry point: simulate, report, calibrate.
#pragma once

#include <iosfwd>

namespace tpsim {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;   // bad config, unknown flag, usage error
inline constexpr int kExitRuntime = 2;  // I/O and simulation failures

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

}  // namespace tpsim
